#include "physfac/cli/app.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "physfac/attention.hpp"
#include "physfac/cli/csv.hpp"
#include "physfac/error.hpp"
#include "physfac/factorize.hpp"
#include "physfac/metrics.hpp"
#include "physfac/network.hpp"
#include "physfac/spectrum.hpp"
#include "physfac/synth.hpp"

namespace physfac::cli {

namespace {

constexpr std::size_t kWarmupRuns = 3;

void write_text(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty() || path == "-") {
    fallback << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw IoError("cannot write '" + path + "'");
  f << text;
  if (!f) throw IoError("failed writing '" + path + "'");
}

std::vector<std::size_t> parse_shape(const std::string& text) {
  std::vector<std::size_t> dims;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      dims.push_back(static_cast<std::size_t>(std::stoul(item)));
    } catch (const std::exception&) {
      throw PreconditionError("malformed shape '" + text + "'");
    }
  }
  if (dims.size() != 4) throw PreconditionError("shape needs four extents tau,kappa,alpha,beta");
  return dims;
}

struct Clips {
  std::optional<VideoClip> rgb;
  std::optional<VideoClip> thermal;
  Waveform pulse;
  Waveform respiration;
};

/// Synthetic inputs matching the model's routing.
Clips make_clips(const MiniModelConfig& m, std::size_t frames, double fps, std::uint64_t seed) {
  const double duration = static_cast<double>(frames) / fps;
  Clips c{std::nullopt, std::nullopt, gen_pulse(fps, 72.0, duration, 0.3, 0.0, seed),
          gen_respiration(fps, 15.0, duration, 0.0, 0.0, seed + 1)};
  const bool want_rgb = m.routing == Routing::split || m.input_channels >= 3;
  const bool want_thermal = m.routing == Routing::split || m.input_channels != 3;
  if (want_rgb) {
    c.rgb = gen_video_clip(frames, m.input_resolution, 3, fps, c.pulse, c.respiration, 0.01, seed + 2);
  }
  if (want_thermal) {
    c.thermal = gen_video_clip(frames, m.input_resolution, 1, fps, c.pulse, c.respiration, 0.01, seed + 3);
  }
  return c;
}

// ---------------------------------------------------------------------------

struct FactorizeOptions {
  std::string input;
  std::string variant;
  long rank = 0;
  int iterations = 0;
  std::string target;
  std::string low_rank_out;
  std::string out;
};

int cmd_factorize(const FactorizeOptions& o, const RunConfig& cfg, std::ostream& out) {
  const Matrix v = read_matrix_csv_file(o.input);
  const AttentionVariant variant = parse_variant(o.variant.empty() ? cfg.attention.variant : o.variant);
  const long rank = o.rank > 0 ? o.rank : cfg.attention.rank;
  const int iterations = o.iterations > 0 ? o.iterations : cfg.attention.iterations;

  FactorizationResult fr;
  switch (variant) {
    case AttentionVariant::fsam:
      fr = nmf_mu(v, rank, iterations, cfg.seed, cfg.attention.epsilon);
      break;
    case AttentionVariant::grbf: {
      const auto phi = grbf_basis(v.rows(), cfg.attention.grbf_sigma, cfg.attention.grbf_delta_t);
      fr = constrained_nmf_mu(v, phi.phi, rank, iterations, cfg.seed, cfg.attention.epsilon);
      break;
    }
    case AttentionVariant::tsfm: {
      if (o.target.empty()) throw PreconditionError("tsfm factorization needs --target");
      const auto y = read_signal_csv_file(o.target);
      const auto tc = target_basis(y.values, v.rows());
      fr = constrained_nmf_mu(v, tc.as_matrix(), rank, iterations, cfg.seed, cfg.attention.epsilon);
      break;
    }
  }

  Json j = factorization_json(fr, v);
  j["variant"] = std::string(to_string(variant));
  if (!o.low_rank_out.empty()) {
    std::ostringstream csv;
    write_matrix_csv(csv, fr.low_rank);
    write_text(o.low_rank_out, csv.str(), out);
  }
  write_text(o.out, dump_report(j), out);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct AttendOptions {
  std::string input;
  std::string shape = "160,4,6,6";
  std::string target;
  std::string variant;
  double noise = 0.3;
  double rate = 72.0;
  double fs = 30.0;
  bool omit = false;
  std::string excited_out;
  std::string out;
};

int cmd_attend(const AttendOptions& o, const RunConfig& cfg, std::ostream& out) {
  const auto dims = parse_shape(o.shape);
  const Shape4 shape{dims[0], dims[1], dims[2], dims[3]};

  AttentionConfig att = cfg.attention_config();
  if (!o.variant.empty()) att.variant = parse_variant(o.variant);

  VoxelEmbedding eps;
  std::optional<std::vector<double>> target;
  std::optional<std::vector<bool>> planted;
  if (o.input.empty()) {
    const Waveform y = gen_pulse(o.fs, o.rate, static_cast<double>(shape.tau) / o.fs, 0.0, 0.0, cfg.seed);
    if (y.size() != shape.tau) throw PreconditionError("tau does not map onto whole samples at this fs");
    auto pe = gen_planted_embedding(PlantSpec{shape, quadrant_mask(shape), y, o.noise, cfg.seed});
    eps = std::move(pe.embedding);
    planted = std::move(pe.planted);
    target = y.samples;
  } else {
    eps = unflatten_to_voxel(read_matrix_csv_file(o.input), shape);
  }
  if (!o.target.empty()) target = read_signal_csv_file(o.target).values;

  Json j;
  j["shape"] = dims;
  j["variant"] = std::string(to_string(att.variant));
  j["omit_attention"] = o.omit;

  VoxelEmbedding excited = eps;
  if (!o.omit) {
    std::optional<std::span<const double>> tspan;
    if (target) tspan = std::span<const double>(*target);
    const AttentionOutput a = compute_attention(eps, att, tspan);
    excited = a.excited;
    j["error_trace"] = a.factorization.error_trace;
    j["iterations"] = a.factorization.iterations;
  }

  if (target) {
    const CsimMap before = csim_map(eps, *target);
    const CsimMap after = csim_map(excited, *target);
    Json cs;
    if (planted) {
      auto gap = [&](const CsimMap& m) {
        double ps = 0, bs = 0;
        std::size_t pn = 0, bn = 0;
        for (std::size_t i = 0; i < m.values.size(); ++i) {
          if ((*planted)[i]) {
            ps += m.values[i];
            ++pn;
          } else {
            bs += m.values[i];
            ++bn;
          }
        }
        const double pm = pn ? ps / static_cast<double>(pn) : 0.0;
        const double bm = bn ? bs / static_cast<double>(bn) : 0.0;
        return Json{{"planted_mean", pm}, {"background_mean", bm}, {"gap", pm - bm}};
      };
      cs["input"] = gap(before);
      cs["excited"] = gap(after);
    } else {
      auto mean = [](const CsimMap& m) {
        return std::accumulate(m.values.begin(), m.values.end(), 0.0) / static_cast<double>(m.values.size());
      };
      cs["input_mean"] = mean(before);
      cs["excited_mean"] = mean(after);
    }
    j["csim"] = std::move(cs);
  }

  if (!o.excited_out.empty()) {
    std::ostringstream csv;
    write_matrix_csv(csv, flatten_to_matrix(excited));
    write_text(o.excited_out, csv.str(), out);
  }
  write_text(o.out, dump_report(j), out);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct MetricsOptions {
  std::string pred;
  std::string gt;
  double fs = 0.0;
  std::string kind = "hr";
  std::string format = "json";
  bool bandpass = false;
  std::string out;
};

int cmd_metrics(const MetricsOptions& o, const RunConfig& cfg, std::ostream& out) {
  const SignalCsv pred = read_signal_csv_file(o.pred);
  const SignalCsv gt = read_signal_csv_file(o.gt);
  double fs = o.fs;
  if (!(fs > 0.0)) fs = gt.inferred_fs.value_or(pred.inferred_fs.value_or(0.0));
  if (!(fs > 0.0)) throw ParseError("sampling rate unknown: pass --fs or use (time,value) files");

  const RateKind kind = parse_rate_kind(o.kind);
  const RateBand band = cfg.band(kind);
  const std::size_t n = std::min(pred.values.size(), gt.values.size());
  std::vector<double> p(pred.values.begin(), pred.values.begin() + static_cast<std::ptrdiff_t>(n));
  std::vector<double> g(gt.values.begin(), gt.values.begin() + static_cast<std::ptrdiff_t>(n));
  if (o.bandpass || cfg.metrics.bandpass) {
    p = spectral_bandpass(p, fs, band.lo_hz, band.hi_hz);
    g = spectral_bandpass(g, fs, band.lo_hz, band.hi_hz);
  }

  const MetricsReport report =
      evaluate_recording(Waveform(std::move(p), fs), Waveform(std::move(g), fs), band,
                         cfg.evaluation_options());
  if (o.format == "table") {
    write_text(o.out, metrics_table(report, kind), out);
  } else {
    write_text(o.out, dump_report(metrics_json(report, kind, fs)), out);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SynthOptions {
  std::string kind = "pulse";
  double fs = 30.0;
  double rate = 72.0;
  double duration = 30.0;
  double harmonic = 0.0;
  double noise = 0.0;
  bool with_time = false;
  std::string shape = "160,4,6,6";
  std::string mask_out;
  std::string out;
};

int cmd_synth(const SynthOptions& o, const RunConfig& cfg, std::ostream& out) {
  std::ostringstream csv;
  if (o.kind == "pulse" || o.kind == "resp") {
    const Waveform w = o.kind == "pulse"
                           ? gen_pulse(o.fs, o.rate, o.duration, o.harmonic, o.noise, cfg.seed)
                           : gen_respiration(o.fs, o.rate, o.duration, o.harmonic, o.noise, cfg.seed);
    if (o.with_time) {
      std::vector<double> t(w.size());
      for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i) / w.fs;
      write_columns_csv(csv, {"time", "value"}, {t, w.samples});
    } else {
      write_signal_csv(csv, w.samples);
    }
  } else if (o.kind == "embedding") {
    const auto dims = parse_shape(o.shape);
    const Shape4 shape{dims[0], dims[1], dims[2], dims[3]};
    const Waveform y = gen_pulse(o.fs, o.rate, static_cast<double>(shape.tau) / o.fs, o.harmonic, 0.0, cfg.seed);
    if (y.size() != shape.tau) throw PreconditionError("tau does not map onto whole samples at this fs");
    const auto pe = gen_planted_embedding(PlantSpec{shape, quadrant_mask(shape), y, o.noise, cfg.seed});
    write_matrix_csv(csv, flatten_to_matrix(pe.embedding));
    if (!o.mask_out.empty()) {
      std::ostringstream mask;
      for (bool b : pe.planted) mask << (b ? 1 : 0) << '\n';
      write_text(o.mask_out, mask.str(), out);
    }
  } else {
    throw PreconditionError("unknown synth kind '" + o.kind + "' (expected pulse, resp or embedding)");
  }
  write_text(o.out, csv.str(), out);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct BenchOptions {
  std::size_t repeats = 10;
  std::size_t frames = 0;
  std::size_t resolution = 0;
  std::string out;
};

int cmd_bench(const BenchOptions& o, RunConfig cfg, std::ostream& out) {
  if (o.frames > 0) cfg.model.frames = o.frames;
  if (o.resolution > 0) cfg.model.resolution = o.resolution;
  write_text(o.out, dump_report(bench_json(bench_forward(cfg, o.repeats))), out);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct DemoOptions {
  std::size_t frames = 0;
  std::size_t resolution = 0;
  bool with_target = false;
  std::string csv_out;
  std::string out;
};

int cmd_demo_forward(const DemoOptions& o, RunConfig cfg, std::ostream& out) {
  if (o.frames > 0) cfg.model.frames = o.frames;
  if (o.resolution > 0) cfg.model.resolution = o.resolution;
  const MiniModelConfig m = cfg.model_config();
  const DualBranchNet net(m);
  const Clips clips = make_clips(m, cfg.model.frames, cfg.model.fps, cfg.seed);

  std::optional<std::span<const double>> bt, rt;
  if (o.with_target) {
    bt = clips.pulse.view();
    rt = clips.respiration.view();
  }
  const MultitaskOutput res = net.forward_multitask(clips.rgb ? &*clips.rgb : nullptr,
                                                    clips.thermal ? &*clips.thermal : nullptr, bt, rt);

  Json j;
  j["frames"] = cfg.model.frames;
  j["resolution"] = m.input_resolution;
  j["rppg_length"] = res.rppg.size();
  j["rrsp_length"] = res.rrsp.size();
  j["parameter_count"] = net.parameter_count();
  j["with_target"] = o.with_target;
  auto rate = [](const Waveform& w, const RateBand& band) -> Json {
    if (w.duration_s() < kMinRateDurationS) return nullptr;
    return estimate_rate_fft(w, band);
  };
  j["hr_bpm"] = rate(res.rppg, cfg.band(RateKind::hr));
  j["rr_bpm"] = rate(res.rrsp, cfg.band(RateKind::rr));

  if (!o.csv_out.empty()) {
    std::ostringstream csv;
    write_columns_csv(csv, {"rppg", "rrsp"}, {res.rppg.samples, res.rrsp.samples});
    write_text(o.csv_out, csv.str(), out);
  }
  write_text(o.out, dump_report(j), out);
  return kExitOk;
}

}  // namespace

BenchReport bench_forward(const RunConfig& cfg, std::size_t repeats) {
  if (repeats == 0) throw PreconditionError("bench needs at least one timed repeat");
  const MiniModelConfig m = cfg.model_config();
  const DualBranchNet net(m);
  const Clips clips = make_clips(m, cfg.model.frames, cfg.model.fps, cfg.seed);
  const VideoClip* rgb = clips.rgb ? &*clips.rgb : nullptr;
  const VideoClip* thermal = clips.thermal ? &*clips.thermal : nullptr;

  auto once = [&] {
    return net.forward_multitask(rgb, thermal, clips.pulse.view(), clips.respiration.view());
  };
  for (std::size_t i = 0; i < kWarmupRuns; ++i) once();

  BenchReport r;
  for (std::size_t i = 0; i < repeats; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto res = once();
    const auto t1 = std::chrono::steady_clock::now();
    if (res.rppg.size() != cfg.model.frames) throw std::logic_error("bench forward lost frames");
    r.samples_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::vector<double> sorted = r.samples_ms;
  std::sort(sorted.begin(), sorted.end());
  r.min_ms = sorted.front();
  const std::size_t mid = sorted.size() / 2;
  r.median_ms = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  r.mean_ms = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
  r.parameter_count = net.parameter_count();
  r.frames = cfg.model.frames;
  r.resolution = m.input_resolution;
  return r;
}

Json bench_json(const BenchReport& r) {
  Json j;
  j["repeats"] = r.samples_ms.size();
  j["warmup_runs"] = kWarmupRuns;
  j["samples_ms"] = r.samples_ms;
  j["min_ms"] = r.min_ms;
  j["median_ms"] = r.median_ms;
  j["mean_ms"] = r.mean_ms;
  j["parameter_count"] = r.parameter_count;
  j["frames"] = r.frames;
  j["resolution"] = r.resolution;
  return j;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Constrained-NMF attention, toy dual-branch network and physiological signal metrics"};
  app.name(args.empty() ? "physfac" : args.front());
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::uint64_t> seed;
  std::string config_path;
  app.add_option("--seed", seed, "RNG seed for every subcommand (overrides [rng] seed)");
  app.add_option("--config", config_path,
                 std::string("INI run configuration (default: $") + kConfigEnvVar + ")");

  FactorizeOptions fo;
  auto* factorize = app.add_subcommand("factorize", "Factorize a non-negative CSV matrix");
  factorize->add_option("--input", fo.input, "Matrix CSV (rows = time)")->required();
  factorize->add_option("--variant", fo.variant, "fsam | grbf | tsfm (default from config)");
  factorize->add_option("--rank", fo.rank, "Factorization rank");
  factorize->add_option("--iterations", fo.iterations, "Update sweeps");
  factorize->add_option("--target", fo.target, "Target signal CSV (tsfm)");
  factorize->add_option("--low-rank", fo.low_rank_out, "Write the reconstruction as CSV");
  factorize->add_option("-o,--out", fo.out, "JSON report path (default stdout)");

  AttendOptions ao;
  auto* attend = app.add_subcommand("attend", "Run factorize-and-excite attention on an embedding");
  attend->add_option("--input", ao.input, "Flattened embedding CSV (default: synthetic planted embedding)");
  attend->add_option("--shape", ao.shape, "tau,kappa,alpha,beta")->capture_default_str();
  attend->add_option("--target", ao.target, "Target signal CSV of length tau");
  attend->add_option("--variant", ao.variant, "fsam | grbf | tsfm (default from config)");
  attend->add_option("--noise", ao.noise, "Synthetic noise sigma")->capture_default_str();
  attend->add_option("--rate", ao.rate, "Synthetic pulse rate (BPM)")->capture_default_str();
  attend->add_option("--fs", ao.fs, "Synthetic sampling rate (Hz)")->capture_default_str();
  attend->add_flag("--omit-attention", ao.omit, "Pass the embedding through unchanged");
  attend->add_option("--excited-out", ao.excited_out, "Write the excited embedding as CSV");
  attend->add_option("-o,--out", ao.out, "JSON report path (default stdout)");

  MetricsOptions mo;
  auto* metrics = app.add_subcommand("metrics", "Score a predicted signal against ground truth");
  metrics->add_option("pred", mo.pred, "Predicted signal CSV")->required();
  metrics->add_option("gt", mo.gt, "Ground-truth signal CSV")->required();
  metrics->add_option("--fs", mo.fs, "Sampling rate in Hz (inferred from a time column if omitted)");
  metrics->add_option("--kind", mo.kind, "hr | rr")->capture_default_str();
  metrics->add_option("--format", mo.format, "json | table")
      ->check(CLI::IsMember({"json", "table"}))
      ->capture_default_str();
  metrics->add_flag("--bandpass", mo.bandpass, "Spectrally mask both signals to the band first");
  metrics->add_option("-o,--out", mo.out, "Report path (default stdout)");

  SynthOptions so;
  auto* synth = app.add_subcommand("synth", "Generate synthetic signals or planted embeddings as CSV");
  synth->add_option("--kind", so.kind, "pulse | resp | embedding")->capture_default_str();
  synth->add_option("--fs", so.fs, "Sampling rate (Hz)")->capture_default_str();
  synth->add_option("--rate", so.rate, "Rate per minute")->capture_default_str();
  synth->add_option("--duration", so.duration, "Duration (s)")->capture_default_str();
  synth->add_option("--harmonic", so.harmonic, "Second-harmonic ratio")->capture_default_str();
  synth->add_option("--noise", so.noise, "Gaussian noise sigma")->capture_default_str();
  synth->add_flag("--with-time", so.with_time, "Emit (time,value) columns");
  synth->add_option("--shape", so.shape, "Embedding shape tau,kappa,alpha,beta")->capture_default_str();
  synth->add_option("--mask-out", so.mask_out, "Write the planted mask (one flag per feature)");
  synth->add_option("-o,--out", so.out, "CSV path (default stdout)");

  BenchOptions bo;
  auto* bench = app.add_subcommand("bench", "Time the dual-branch forward pass");
  bench->add_option("--repeats", bo.repeats, "Timed repeats after 3 warm-ups")->capture_default_str();
  bench->add_option("--frames", bo.frames, "Clip length (default from config)");
  bench->add_option("--resolution", bo.resolution, "9 | 36 | 72 (default from config)");
  bench->add_option("-o,--out", bo.out, "JSON report path (default stdout)");

  DemoOptions dopt;
  auto* demo = app.add_subcommand("demo-forward", "Run the network on a synthetic clip");
  demo->add_option("--frames", dopt.frames, "Clip length (default from config)");
  demo->add_option("--resolution", dopt.resolution, "9 | 36 | 72 (default from config)");
  demo->add_flag("--with-target", dopt.with_target, "Feed ground-truth signals to tsfm attention");
  demo->add_option("--csv", dopt.csv_out, "Write rppg,rrsp columns as CSV");
  demo->add_option("-o,--out", dopt.out, "JSON summary path (default stdout)");

  bool print_defaults = false;
  auto* config = app.add_subcommand("config", "Print the effective or default configuration");
  config->add_flag("--print-defaults", print_defaults, "Print built-in defaults");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitIoError;
  }

  try {
    if (config_path.empty()) {
      if (const char* env = std::getenv(kConfigEnvVar)) config_path = env;
    }
    RunConfig cfg = config_path.empty() ? RunConfig{} : RunConfig::load(config_path);
    if (seed) cfg.seed = *seed;

    if (*factorize) return cmd_factorize(fo, cfg, out);
    if (*attend) return cmd_attend(ao, cfg, out);
    if (*metrics) return cmd_metrics(mo, cfg, out);
    if (*synth) return cmd_synth(so, cfg, out);
    if (*bench) return cmd_bench(bo, cfg, out);
    if (*demo) return cmd_demo_forward(dopt, cfg, out);
    if (*config) {
      out << (print_defaults ? RunConfig{}.dump() : cfg.dump());
      return kExitOk;
    }
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIoError;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIoError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomainError;
  }
  return kExitDomainError;
}

}  // namespace physfac::cli
