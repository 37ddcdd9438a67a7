#include "physfac/cli/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "physfac/error.hpp"

namespace physfac::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& raw, const std::string& key) {
  const std::string s = trim(raw);
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ParseError("config key '" + key + "': cannot parse '" + s + "'");
  }
  return value;
}

template <typename T>
std::vector<T> parse_list(const std::string& raw, const std::string& key) {
  std::vector<T> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<T>(item, key));
  if (out.empty()) throw ParseError("config key '" + key + "' is empty");
  return out;
}

bool parse_bool(const std::string& raw, const std::string& key) {
  const std::string s = trim(raw);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ParseError("config key '" + key + "': expected true or false, got '" + s + "'");
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename T>
std::string format_list(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_floating_point_v<T>) {
      out += format_number(v[i]);
    } else {
      out += std::to_string(v[i]);
    }
  }
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, std::map<std::string, Setter>>& setters() {
  static const std::map<std::string, std::map<std::string, Setter>> table = {
      {"attention",
       {
           {"variant", [](RunConfig& c, const std::string& v) {
              c.attention.variant = trim(v);
              parse_variant(c.attention.variant);
            }},
           {"rank", [](RunConfig& c, const std::string& v) { c.attention.rank = parse_number<long>(v, "rank"); }},
           {"iterations", [](RunConfig& c, const std::string& v) { c.attention.iterations = parse_number<int>(v, "iterations"); }},
           {"epsilon", [](RunConfig& c, const std::string& v) { c.attention.epsilon = parse_number<double>(v, "epsilon"); }},
           {"grbf_sigma", [](RunConfig& c, const std::string& v) { c.attention.grbf_sigma = parse_number<double>(v, "grbf_sigma"); }},
           {"grbf_delta_t", [](RunConfig& c, const std::string& v) { c.attention.grbf_delta_t = parse_number<int>(v, "grbf_delta_t"); }},
           {"omit", [](RunConfig& c, const std::string& v) { c.attention.omit = parse_bool(v, "omit"); }},
       }},
      {"model",
       {
           {"resolution", [](RunConfig& c, const std::string& v) { c.model.resolution = parse_number<std::size_t>(v, "resolution"); }},
           {"channels", [](RunConfig& c, const std::string& v) { c.model.channels = parse_number<std::size_t>(v, "channels"); }},
           {"routing", [](RunConfig& c, const std::string& v) {
              const std::string r = trim(v);
              if (r != "shared" && r != "split") throw ParseError("config key 'routing': expected shared or split");
              c.model.routing = r;
            }},
           {"bvp_channels", [](RunConfig& c, const std::string& v) { c.model.bvp_channels = parse_list<std::size_t>(v, "bvp_channels"); }},
           {"bvp_temporal_kernels", [](RunConfig& c, const std::string& v) { c.model.bvp_temporal_kernels = parse_list<std::size_t>(v, "bvp_temporal_kernels"); }},
           {"bvp_spatial_kernels", [](RunConfig& c, const std::string& v) { c.model.bvp_spatial_kernels = parse_list<std::size_t>(v, "bvp_spatial_kernels"); }},
           {"bvp_spatial_strides", [](RunConfig& c, const std::string& v) { c.model.bvp_spatial_strides = parse_list<std::size_t>(v, "bvp_spatial_strides"); }},
           {"rsp_channels", [](RunConfig& c, const std::string& v) { c.model.rsp_channels = parse_list<std::size_t>(v, "rsp_channels"); }},
           {"rsp_temporal_kernels", [](RunConfig& c, const std::string& v) { c.model.rsp_temporal_kernels = parse_list<std::size_t>(v, "rsp_temporal_kernels"); }},
           {"rsp_spatial_kernels", [](RunConfig& c, const std::string& v) { c.model.rsp_spatial_kernels = parse_list<std::size_t>(v, "rsp_spatial_kernels"); }},
           {"rsp_temporal_strides", [](RunConfig& c, const std::string& v) { c.model.rsp_temporal_strides = parse_list<std::size_t>(v, "rsp_temporal_strides"); }},
           {"rsp_spatial_strides", [](RunConfig& c, const std::string& v) { c.model.rsp_spatial_strides = parse_list<std::size_t>(v, "rsp_spatial_strides"); }},
           {"upsample_factor", [](RunConfig& c, const std::string& v) { c.model.upsample_factor = parse_number<std::size_t>(v, "upsample_factor"); }},
           {"attention_index", [](RunConfig& c, const std::string& v) {
              if (trim(v) == "auto") {
                c.model.attention_index.reset();
              } else {
                c.model.attention_index = parse_number<std::size_t>(v, "attention_index");
              }
            }},
           {"frames", [](RunConfig& c, const std::string& v) { c.model.frames = parse_number<std::size_t>(v, "frames"); }},
           {"fps", [](RunConfig& c, const std::string& v) { c.model.fps = parse_number<double>(v, "fps"); }},
       }},
      {"metrics",
       {
           {"hr_band", [](RunConfig& c, const std::string& v) { c.metrics.hr_band = parse_list<double>(v, "hr_band"); }},
           {"rr_band", [](RunConfig& c, const std::string& v) { c.metrics.rr_band = parse_list<double>(v, "rr_band"); }},
           {"window_s", [](RunConfig& c, const std::string& v) { c.metrics.window_s = parse_number<double>(v, "window_s"); }},
           {"pad_factor", [](RunConfig& c, const std::string& v) { c.metrics.pad_factor = parse_number<int>(v, "pad_factor"); }},
           {"max_lag_s", [](RunConfig& c, const std::string& v) { c.metrics.max_lag_s = parse_number<double>(v, "max_lag_s"); }},
           {"bandpass", [](RunConfig& c, const std::string& v) { c.metrics.bandpass = parse_bool(v, "bandpass"); }},
       }},
      {"rng",
       {
           {"seed", [](RunConfig& c, const std::string& v) { c.seed = parse_number<std::uint64_t>(v, "seed"); }},
       }},
  };
  return table;
}

std::vector<BlockSpec> make_blocks(const std::vector<std::size_t>& channels,
                                   const std::vector<std::size_t>& tk,
                                   const std::vector<std::size_t>& sk,
                                   const std::vector<std::size_t>& ts,
                                   const std::vector<std::size_t>& ss, const char* branch) {
  const std::size_t n = channels.size();
  if (tk.size() != n || sk.size() != n || ts.size() != n || ss.size() != n) {
    throw PreconditionError(std::string(branch) + " block lists have different lengths");
  }
  std::vector<BlockSpec> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(BlockSpec{channels[i], tk[i], sk[i], ts[i], ss[i]});
  return out;
}

}  // namespace

RunConfig RunConfig::parse(std::istream& in) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ParseError("config: " + e.message(), e.line());
  }

  RunConfig cfg;
  const auto& table = setters();
  for (const auto& [section, body] : tree) {
    const auto sec = table.find(section);
    if (sec == table.end() || !body.data().empty()) {
      throw ParseError("config: unknown section or top-level key '" + section + "'");
    }
    for (const auto& [key, node] : body) {
      const auto setter = sec->second.find(key);
      if (setter == sec->second.end()) {
        throw ParseError("config: unknown key '" + key + "' in [" + section + "]");
      }
      try {
        setter->second(cfg, node.data());
      } catch (const PreconditionError& e) {
        throw ParseError(std::string("config: ") + e.what());
      }
    }
  }
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  return parse(in);
}

std::string RunConfig::dump() const {
  std::ostringstream o;
  o << "; Run configuration. Every key is optional; unknown keys are rejected.\n\n"
    << "[attention]\n"
    << "; fsam (unconstrained NMF), grbf (Gaussian-basis smooth NMF), tsfm (target-signal constrained)\n"
    << "variant = " << attention.variant << "\n"
    << "; inner factorization rank L\n"
    << "rank = " << attention.rank << "\n"
    << "; multiplicative-update sweeps\n"
    << "iterations = " << attention.iterations << "\n"
    << "; denominator guard of the updates\n"
    << "epsilon = " << format_number(attention.epsilon) << "\n"
    << "; GRBF standard deviation and spacing, in samples (grbf only)\n"
    << "grbf_sigma = " << format_number(attention.grbf_sigma) << "\n"
    << "grbf_delta_t = " << attention.grbf_delta_t << "\n"
    << "; skip the attention block in the network\n"
    << "omit = " << (attention.omit ? "true" : "false") << "\n\n"
    << "[model]\n"
    << "; square input resolution: 9, 36 or 72\n"
    << "resolution = " << model.resolution << "\n"
    << "; input channels: 1 (thermal), 3 (RGB), 4 (RGB + thermal)\n"
    << "channels = " << model.channels << "\n"
    << "; shared (both branches see the same stream) or split (BVP<-RGB, RSP<-thermal)\n"
    << "routing = " << model.routing << "\n"
    << "bvp_channels = " << format_list(model.bvp_channels) << "\n"
    << "bvp_temporal_kernels = " << format_list(model.bvp_temporal_kernels) << "\n"
    << "bvp_spatial_kernels = " << format_list(model.bvp_spatial_kernels) << "\n"
    << "bvp_spatial_strides = " << format_list(model.bvp_spatial_strides) << "\n"
    << "rsp_channels = " << format_list(model.rsp_channels) << "\n"
    << "rsp_temporal_kernels = " << format_list(model.rsp_temporal_kernels) << "\n"
    << "rsp_spatial_kernels = " << format_list(model.rsp_spatial_kernels) << "\n"
    << "rsp_temporal_strides = " << format_list(model.rsp_temporal_strides) << "\n"
    << "rsp_spatial_strides = " << format_list(model.rsp_spatial_strides) << "\n"
    << "; must equal the product of rsp_temporal_strides\n"
    << "upsample_factor = " << model.upsample_factor << "\n"
    << "; block whose output is factorized; auto = penultimate\n"
    << "attention_index = "
    << (model.attention_index ? std::to_string(*model.attention_index) : std::string("auto")) << "\n"
    << "; clip length and frame rate used by bench and demo-forward\n"
    << "frames = " << model.frames << "\n"
    << "fps = " << format_number(model.fps) << "\n\n"
    << "[metrics]\n"
    << "; band edges in Hz\n"
    << "hr_band = " << format_list(metrics.hr_band) << "\n"
    << "rr_band = " << format_list(metrics.rr_band) << "\n"
    << "; evaluation window length in seconds\n"
    << "window_s = " << format_number(metrics.window_s) << "\n"
    << "; zero padding: FFT length = pad_factor x next power of two\n"
    << "pad_factor = " << metrics.pad_factor << "\n"
    << "; MACC lag budget in seconds\n"
    << "max_lag_s = " << format_number(metrics.max_lag_s) << "\n"
    << "; spectral-mask both signals to the band before scoring\n"
    << "bandpass = " << (metrics.bandpass ? "true" : "false") << "\n\n"
    << "[rng]\n"
    << "seed = " << seed << "\n";
  return o.str();
}

AttentionConfig RunConfig::attention_config() const {
  AttentionConfig a;
  a.variant = parse_variant(attention.variant);
  a.rank = attention.rank;
  a.iterations = attention.iterations;
  a.epsilon = attention.epsilon;
  a.grbf_sigma = attention.grbf_sigma;
  a.grbf_delta_t = attention.grbf_delta_t;
  a.seed = seed;
  return a;
}

MiniModelConfig RunConfig::model_config() const {
  MiniModelConfig m;
  m.input_resolution = model.resolution;
  m.input_channels = model.channels;
  m.routing = model.routing == "split" ? Routing::split : Routing::shared;
  m.bvp_blocks = make_blocks(model.bvp_channels, model.bvp_temporal_kernels,
                             model.bvp_spatial_kernels, std::vector<std::size_t>(model.bvp_channels.size(), 1),
                             model.bvp_spatial_strides, "BVP");
  m.rsp_blocks = make_blocks(model.rsp_channels, model.rsp_temporal_kernels,
                             model.rsp_spatial_kernels, model.rsp_temporal_strides,
                             model.rsp_spatial_strides, "RSP");
  m.rsp_upsample_factor = model.upsample_factor;
  const AttentionConfig att = attention_config();
  for (BranchAttention* b : {&m.bvp_attention, &m.rsp_attention}) {
    b->config = att;
    b->omit = attention.omit;
    b->placement = model.attention_index;
  }
  m.seed = seed;
  m.validate();
  return m;
}

RateBand RunConfig::band(RateKind kind) const {
  const auto& edges = kind == RateKind::hr ? metrics.hr_band : metrics.rr_band;
  if (edges.size() != 2) throw PreconditionError("band must list exactly two edges");
  RateBand b{edges[0], edges[1], kind};
  b.validate();
  return b;
}

EvaluationOptions RunConfig::evaluation_options() const {
  EvaluationOptions o;
  o.window_s = metrics.window_s;
  o.pad_factor = metrics.pad_factor;
  o.max_lag_s = metrics.max_lag_s;
  return o;
}

}  // namespace physfac::cli
