#include "stman/model/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "stman/errors.hpp"

namespace stman {

void ModelConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw ContractError(std::string("config: ") + name + " must be positive");
  };
  positive(K, "K");
  positive(H, "H");
  positive(D, "D");
  positive(E, "E");
  positive(batch, "batch");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ContractError("config: dropout must lie in [0, 1)");
  if (!(lr > 0.0)) throw ContractError("config: lr must be positive");
  if (!(lr_decay > 0.0)) throw ContractError("config: lr_decay must be positive");
  if (!(momentum_mu >= 0.0 && momentum_mu < 1.0)) {
    throw ContractError("config: momentum_mu must lie in [0, 1)");
  }
  if (!(init_range > 0.0)) throw ContractError("config: init_range must be positive");
  if (min_count == 0) throw ContractError("config: min_count must be positive");
  if (!(td_fraction >= 0.0 && td_fraction <= 1.0)) {
    throw ContractError("config: td_fraction must lie in [0, 1]");
  }
  if (use_td && !use_aux) {
    throw ContractError("config: use_td requires use_aux (the discriminator needs both task streams)");
  }
}

const std::vector<std::string>& variant_names() {
  static const std::vector<std::string> names = {"basic",    "basic-mask", "basic-aux",
                                                 "basic+td", "basic+st",   "stman"};
  return names;
}

ModelConfig with_variant(ModelConfig c, std::string_view name) {
  c.use_td = false;
  c.use_st = false;
  c.use_mask = true;
  c.use_aux = true;
  if (name == "basic") {
  } else if (name == "basic-mask") {
    c.use_mask = false;
  } else if (name == "basic-aux") {
    c.use_aux = false;
  } else if (name == "basic+td") {
    c.use_td = true;
  } else if (name == "basic+st") {
    c.use_st = true;
  } else if (name == "stman") {
    c.use_td = true;
    c.use_st = true;
  } else {
    throw ContractError("unknown variant \"" + std::string(name) +
                        "\"; expected one of basic, basic-mask, basic-aux, basic+td, basic+st, stman");
  }
  return c;
}

std::string variant_of(const ModelConfig& c) {
  for (const auto& name : variant_names()) {
    const ModelConfig v = with_variant(c, name);
    if (v.use_td == c.use_td && v.use_st == c.use_st && v.use_mask == c.use_mask &&
        v.use_aux == c.use_aux) {
      return name;
    }
  }
  return "custom";
}

namespace {

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError("config: bad value \"" + std::string(text) + "\" for " + std::string(key));
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "on") return true;
  if (text == "false" || text == "0" || text == "off") return false;
  throw ParseError("config: bad boolean \"" + std::string(text) + "\" for " + std::string(key));
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void set_config_field(ModelConfig& c, std::string_view key, std::string_view value) {
  if (key == "K") c.K = parse_number<std::size_t>(key, value);
  else if (key == "Z") c.Z = parse_number<std::size_t>(key, value);
  else if (key == "H") c.H = parse_number<std::size_t>(key, value);
  else if (key == "D") c.D = parse_number<std::size_t>(key, value);
  else if (key == "E") c.E = parse_number<std::size_t>(key, value);
  else if (key == "dropout") c.dropout = parse_number<double>(key, value);
  else if (key == "lr") c.lr = parse_number<double>(key, value);
  else if (key == "lr_decay") c.lr_decay = parse_number<double>(key, value);
  else if (key == "momentum_mu") c.momentum_mu = parse_number<double>(key, value);
  else if (key == "batch") c.batch = parse_number<std::size_t>(key, value);
  else if (key == "epochs") c.epochs = parse_number<std::size_t>(key, value);
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "use_td") c.use_td = parse_bool(key, value);
  else if (key == "use_st") c.use_st = parse_bool(key, value);
  else if (key == "use_mask") c.use_mask = parse_bool(key, value);
  else if (key == "use_aux") c.use_aux = parse_bool(key, value);
  else if (key == "init_range") c.init_range = parse_number<double>(key, value);
  else if (key == "min_count") c.min_count = parse_number<std::size_t>(key, value);
  else if (key == "td_fraction") c.td_fraction = parse_number<double>(key, value);
  else if (key == "adv_target") {
    if (value == "dense") c.adv_target = AdvTarget::DenseLayers;
    else if (value == "decoders") c.adv_target = AdvTarget::Decoders;
    else throw ParseError("config: adv_target must be dense or decoders");
  } else if (key == "adv_schedule") {
    if (value == "every_epoch") c.adv_schedule = AdvSchedule::EveryEpoch;
    else if (value == "first_epoch") c.adv_schedule = AdvSchedule::FirstEpoch;
    else throw ParseError("config: adv_schedule must be every_epoch or first_epoch");
  } else {
    throw ParseError("config: unknown key \"" + std::string(key) + "\"");
  }
}

ModelConfig parse_config(std::istream& in, const std::string& source) {
  ModelConfig c;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(source + ":" + std::to_string(line_no) + ": expected key=value");
    }
    try {
      set_config_field(c, trim(view.substr(0, eq)), trim(view.substr(eq + 1)));
    } catch (const ParseError& e) {
      throw ParseError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return c;
}

ModelConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file " + path.string());
  return parse_config(in, path.string());
}

std::string to_config_text(const ModelConfig& c) {
  std::ostringstream os;
  os << "K=" << c.K << '\n'
     << "Z=" << c.Z << '\n'
     << "H=" << c.H << '\n'
     << "D=" << c.D << '\n'
     << "E=" << c.E << '\n'
     << "dropout=" << format_double(c.dropout) << '\n'
     << "lr=" << format_double(c.lr) << '\n'
     << "lr_decay=" << format_double(c.lr_decay) << '\n'
     << "momentum_mu=" << format_double(c.momentum_mu) << '\n'
     << "batch=" << c.batch << '\n'
     << "epochs=" << c.epochs << '\n'
     << "seed=" << c.seed << '\n'
     << "use_td=" << (c.use_td ? "true" : "false") << '\n'
     << "use_st=" << (c.use_st ? "true" : "false") << '\n'
     << "use_mask=" << (c.use_mask ? "true" : "false") << '\n'
     << "use_aux=" << (c.use_aux ? "true" : "false") << '\n'
     << "adv_target=" << (c.adv_target == AdvTarget::DenseLayers ? "dense" : "decoders") << '\n'
     << "adv_schedule="
     << (c.adv_schedule == AdvSchedule::EveryEpoch ? "every_epoch" : "first_epoch") << '\n'
     << "init_range=" << format_double(c.init_range) << '\n'
     << "min_count=" << c.min_count << '\n'
     << "td_fraction=" << format_double(c.td_fraction) << '\n';
  return os.str();
}

void apply_env_overrides(ModelConfig& c) {
  if (const char* s = std::getenv("STMAN_SEED"); s != nullptr && *s != '\0') {
    set_config_field(c, "seed", s);
  }
}

}  // namespace stman
