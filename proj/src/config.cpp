#include "gmc/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "gmc/errors.hpp"

namespace gmc {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in{std::string(s)};
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const std::string t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError("config key '" + key + "': cannot parse '" + text + "'");
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = lower(trim(text));
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError("config key '" + key + "': expected a boolean, got '" + text + "'");
}

std::vector<std::size_t> parse_sizes(const std::string& key, const std::string& text) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(text)) out.push_back(parse_number<std::size_t>(key, item));
  return out;
}

std::string fmt(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string fmt(std::size_t x) { return std::to_string(x); }
std::string fmt(int x) { return std::to_string(x); }
std::string fmt(bool x) { return x ? "true" : "false"; }

template <typename T>
std::string join(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_same_v<T, std::string>) {
      out += xs[i];
    } else if constexpr (std::is_same_v<T, std::filesystem::path>) {
      out += xs[i].string();
    } else {
      out += std::to_string(xs[i]);
    }
  }
  return out;
}

struct Binding {
  std::function<void(ExperimentConfig&, const std::string& key, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

// Builds a binding for a numeric or boolean field reached through `field`.
template <typename T, typename F>
Binding field_binding(F field) {
  Binding b;
  b.set = [field](ExperimentConfig& c, const std::string& key, const std::string& v) {
    if constexpr (std::is_same_v<T, bool>) {
      field(c) = parse_bool(key, v);
    } else {
      field(c) = parse_number<T>(key, v);
    }
  };
  b.get = [field](const ExperimentConfig& c) { return fmt(field(const_cast<ExperimentConfig&>(c))); };
  return b;
}

template <typename F>
Binding sizes_binding(F field) {
  Binding b;
  b.set = [field](ExperimentConfig& c, const std::string& key, const std::string& v) {
    field(c) = parse_sizes(key, v);
  };
  b.get = [field](const ExperimentConfig& c) { return join(field(const_cast<ExperimentConfig&>(c))); };
  return b;
}

template <typename F>
Binding path_binding(F field) {
  Binding b;
  b.set = [field](ExperimentConfig& c, const std::string&, const std::string& v) { field(c) = trim(v); };
  b.get = [field](const ExperimentConfig& c) { return field(const_cast<ExperimentConfig&>(c)).string(); };
  return b;
}

#define GMC_FIELD(type, expr) field_binding<type>([](ExperimentConfig& c) -> type& { return c.expr; })

const std::map<std::string, Binding>& bindings() {
  static const std::map<std::string, Binding> table = [] {
    std::map<std::string, Binding> t;
    t["experiment.track"] = {[](ExperimentConfig& c, const std::string&, const std::string& v) { c.track = parse_track(v); },
                             [](const ExperimentConfig& c) { return std::string(to_string(c.track)); }};
    t["experiment.condition"] = {
        [](ExperimentConfig& c, const std::string&, const std::string& v) { c.condition = parse_condition(v); },
        [](const ExperimentConfig& c) { return std::string(to_string(c.condition)); }};
    t["experiment.methods"] = {
        [](ExperimentConfig& c, const std::string&, const std::string& v) { c.methods = split_list(lower(v)); },
        [](const ExperimentConfig& c) { return join(c.methods); }};
    t["experiment.seeds"] = {[](ExperimentConfig& c, const std::string&, const std::string& v) { c.seeds = parse_seeds(v); },
                             [](const ExperimentConfig& c) { return join(c.seeds); }};
    t["experiment.output_dir"] = path_binding([](ExperimentConfig& c) -> std::filesystem::path& { return c.output_dir; });

    t["data.source"] = {[](ExperimentConfig& c, const std::string& key, const std::string& v) {
                          const std::string s = lower(trim(v));
                          if (s == "synthetic") c.data_source = DataSource::kSynthetic;
                          else if (s == "mnist") c.data_source = DataSource::kMnist;
                          else if (s == "cifar10") c.data_source = DataSource::kCifar10;
                          else throw ConfigError("config key '" + key + "': unknown data source '" + v + "'");
                        },
                        [](const ExperimentConfig& c) { return std::string(to_string(c.data_source)); }};
    t["data.input_dim"] = GMC_FIELD(std::size_t, synthetic.input_dim);
    t["data.separation"] = GMC_FIELD(double, synthetic.separation);
    t["data.difficulty_spread"] = GMC_FIELD(double, synthetic.difficulty_spread);
    t["data.noise_std"] = GMC_FIELD(double, synthetic.noise_std);
    t["data.samples_per_class"] = GMC_FIELD(std::size_t, synthetic.samples_per_class);
    t["data.seed"] = GMC_FIELD(std::uint64_t, synthetic.seed);
    t["data.mnist_images"] = path_binding([](ExperimentConfig& c) -> std::filesystem::path& { return c.mnist_images; });
    t["data.mnist_labels"] = path_binding([](ExperimentConfig& c) -> std::filesystem::path& { return c.mnist_labels; });
    t["data.cifar_batches"] = {[](ExperimentConfig& c, const std::string&, const std::string& v) {
                                 c.cifar_batches.clear();
                                 for (const auto& s : split_list(v)) c.cifar_batches.emplace_back(s);
                               },
                               [](const ExperimentConfig& c) { return join(c.cifar_batches); }};

    t["bandit.epochs"] = GMC_FIELD(std::size_t, bandit.epochs);
    t["bandit.batches_per_epoch"] = GMC_FIELD(std::size_t, bandit.batches_per_epoch);
    t["bandit.batch_size"] = GMC_FIELD(std::size_t, bandit.batch_size);
    t["bandit.classifier_hidden"] = sizes_binding([](ExperimentConfig& c) -> std::vector<std::size_t>& { return c.bandit.classifier_hidden; });
    t["bandit.classifier_lr"] = GMC_FIELD(double, bandit.classifier_adam.lr);
    t["bandit.classifier_beta1"] = GMC_FIELD(double, bandit.classifier_adam.beta1);
    t["bandit.classifier_beta2"] = GMC_FIELD(double, bandit.classifier_adam.beta2);
    t["bandit.policy_hidden"] = sizes_binding([](ExperimentConfig& c) -> std::vector<std::size_t>& { return c.bandit.actor.hidden_dims; });
    t["bandit.policy_lr"] = GMC_FIELD(double, bandit.actor.adam.lr);
    t["bandit.policy_beta1"] = GMC_FIELD(double, bandit.actor.adam.beta1);
    t["bandit.policy_beta2"] = GMC_FIELD(double, bandit.actor.adam.beta2);
    t["bandit.noise_dim"] = GMC_FIELD(std::size_t, bandit.actor.noise_dim);
    t["bandit.entropy_weight"] = GMC_FIELD(double, bandit.actor.entropy_weight);
    t["bandit.gmc_beta0"] = GMC_FIELD(double, bandit.gmc.beta0);
    t["bandit.gmc_beta1"] = GMC_FIELD(double, bandit.gmc.beta1);
    t["bandit.gmc_epsilon"] = GMC_FIELD(double, bandit.gmc.epsilon);
    t["bandit.gmc_bias_correction"] = GMC_FIELD(bool, bandit.gmc.bias_correction);
    t["bandit.second_moment"] = {
        [](ExperimentConfig& c, const std::string& key, const std::string& v) {
          const std::string s = lower(trim(v));
          if (s == "per_sample") c.bandit.second_moment = SecondMomentSource::kPerSample;
          else if (s == "batch_mean") c.bandit.second_moment = SecondMomentSource::kBatchMean;
          else throw ConfigError("config key '" + key + "': expected per_sample or batch_mean");
        },
        [](const ExperimentConfig& c) {
          return std::string(c.bandit.second_moment == SecondMomentSource::kPerSample ? "per_sample" : "batch_mean");
        }};
    t["bandit.loss_window"] = GMC_FIELD(std::size_t, bandit.loss_window);
    t["bandit.normalize_dim"] = GMC_FIELD(bool, bandit.normalize_dim);
    t["bandit.eval_per_class"] = GMC_FIELD(std::size_t, bandit.eval_per_class);
    t["bandit.action_space"] = {[](ExperimentConfig& c, const std::string&, const std::string& v) { c.action_space = lower(trim(v)); },
                                [](const ExperimentConfig& c) { return c.action_space; }};
    t["bandit.scale_norm_last"] = GMC_FIELD(double, bandit.scales.norm_last);
    t["bandit.scale_norm_all"] = GMC_FIELD(double, bandit.scales.norm_all);
    t["bandit.scale_delta_loss"] = GMC_FIELD(double, bandit.scales.delta_loss);

    t["ppo.gamma"] = GMC_FIELD(double, rl.ppo.gamma);
    t["ppo.gae_lambda"] = GMC_FIELD(double, rl.ppo.gae_lambda);
    t["ppo.clip"] = GMC_FIELD(double, rl.ppo.clip);
    t["ppo.entropy_coef"] = GMC_FIELD(double, rl.ppo.entropy_coef);
    t["ppo.max_grad_norm"] = GMC_FIELD(double, rl.ppo.max_grad_norm);
    t["ppo.epochs"] = GMC_FIELD(std::size_t, rl.ppo.epochs);
    t["ppo.minibatch"] = GMC_FIELD(std::size_t, rl.ppo.minibatch);
    t["ppo.rollout"] = GMC_FIELD(std::size_t, rl.ppo.rollout);
    t["ppo.policy_lr"] = GMC_FIELD(double, rl.ppo.policy_lr);
    t["ppo.value_lr"] = GMC_FIELD(double, rl.ppo.value_lr);
    t["ppo.reward_scaling"] = GMC_FIELD(double, rl.ppo.reward_scaling);
    t["ppo.total_steps"] = GMC_FIELD(std::size_t, rl.ppo.total_steps);
    t["ppo.hidden"] = sizes_binding([](ExperimentConfig& c) -> std::vector<std::size_t>& { return c.rl.ppo.hidden; });
    t["ppo.normalize_advantages"] = GMC_FIELD(bool, rl.ppo.normalize_advantages);
    t["ppo.early_stop_reward"] = GMC_FIELD(double, rl.early_stop_reward);
    t["ppo.reward_window"] = GMC_FIELD(std::size_t, rl.reward_window);

    t["icm.feature_dim"] = GMC_FIELD(std::size_t, rl.icm.feature_dim);
    t["icm.lr"] = GMC_FIELD(double, rl.icm.lr);
    t["icm.intrinsic_coef"] = GMC_FIELD(double, rl.icm.intrinsic_coef);
    t["icm.forward_weight"] = GMC_FIELD(double, rl.icm.forward_weight);
    t["icm.inverse_weight"] = GMC_FIELD(double, rl.icm.inverse_weight);
    t["icm.hidden"] = sizes_binding([](ExperimentConfig& c) -> std::vector<std::size_t>& { return c.rl.icm.hidden; });
    t["icm.minibatch"] = GMC_FIELD(std::size_t, rl.icm.minibatch);

    t["gmc.beta0"] = GMC_FIELD(double, rl.gmc.beta0);
    t["gmc.beta1"] = GMC_FIELD(double, rl.gmc.beta1);
    t["gmc.intrinsic_coef"] = GMC_FIELD(double, rl.gmc.intrinsic_coef);
    t["gmc.dynamics_lr"] = GMC_FIELD(double, rl.gmc.dynamics_lr);
    t["gmc.hidden"] = sizes_binding([](ExperimentConfig& c) -> std::vector<std::size_t>& { return c.rl.gmc.hidden; });
    t["gmc.minibatch"] = GMC_FIELD(std::size_t, rl.gmc.minibatch);

    t["env.size"] = GMC_FIELD(int, rl.env.size);
    t["env.max_steps"] = GMC_FIELD(int, rl.env.max_steps);
    t["env.noise_std"] = GMC_FIELD(double, rl.env.noise_std);
    return t;
  }();
  return table;
}

#undef GMC_FIELD

}  // namespace

std::vector<std::uint64_t> default_seeds() {
  std::vector<std::uint64_t> s(20);
  for (std::uint64_t i = 0; i < 20; ++i) s[i] = i;
  return s;
}

std::string_view to_string(Track track) {
  return track == Track::kBandit ? "bandit" : "gridworld";
}

std::string_view to_string(Condition condition) {
  switch (condition) {
    case Condition::kCurriculum: return "curriculum";
    case Condition::kNoise: return "noise";
    case Condition::kNoNoise: return "nonoise";
    case Condition::kDoorNoise: return "doornoise";
  }
  return "?";
}

Track parse_track(std::string_view name) {
  const std::string s = lower(trim(name));
  if (s == "bandit") return Track::kBandit;
  if (s == "gridworld") return Track::kGridworld;
  throw ConfigError("unknown track '" + std::string(name) + "' (bandit, gridworld)");
}

Condition parse_condition(std::string_view name) {
  std::string s = lower(trim(name));
  s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c == '_' || c == '-'; }), s.end());
  for (Condition c : {Condition::kCurriculum, Condition::kNoise, Condition::kNoNoise, Condition::kDoorNoise}) {
    if (s == to_string(c)) return c;
  }
  throw ConfigError("unknown condition '" + std::string(name) +
                    "' (curriculum, noise, nonoise, doornoise)");
}

std::vector<std::uint64_t> parse_seeds(std::string_view text) {
  const std::string t = trim(text);
  std::vector<std::uint64_t> out;
  const auto dots = t.find("..");
  if (dots != std::string::npos) {
    const auto a = parse_number<std::uint64_t>("seeds", t.substr(0, dots));
    const auto b = parse_number<std::uint64_t>("seeds", t.substr(dots + 2));
    if (b < a) throw ConfigError("seed range '" + t + "' is empty");
    for (std::uint64_t s = a; s <= b; ++s) out.push_back(s);
    return out;
  }
  for (const auto& item : split_list(t)) out.push_back(parse_number<std::uint64_t>("seeds", item));
  if (out.empty()) throw ConfigError("no seeds given");
  return out;
}

ExperimentConfig parse_config(std::string_view text) {
  boost::property_tree::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  ExperimentConfig config;
  const auto& table = bindings();
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError("config key '" + section + "' must sit inside a [section]");
    }
    for (const auto& [key, value] : body) {
      const std::string full = lower(section) + "." + lower(key);
      const auto it = table.find(full);
      if (it == table.end()) throw ConfigError("unknown config key '" + full + "'");
      it->second.set(config, full, value.data());
    }
  }
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string dump_config(const ExperimentConfig& config) {
  std::string out;
  std::string current;
  for (const auto& [full, binding] : bindings()) {
    const auto dot = full.find('.');
    const std::string section = full.substr(0, dot);
    if (section != current) {
      if (!current.empty()) out += '\n';
      out += '[' + section + "]\n";
      current = section;
    }
    out += full.substr(dot + 1) + " = " + binding.get(config) + '\n';
  }
  return out;
}

BanditConfig ExperimentConfig::bandit_for(std::string_view method) const {
  BanditConfig b = bandit;
  b.condition = condition == Condition::kCurriculum ? BanditMode::kCurriculum : BanditMode::kNoise;
  b.method = parse_signal_kind(method);
  ActionSpace space = action_space_for(b.condition);
  if (action_space == "per_class") space = ActionSpace::kPerClass;
  if (action_space == "per_group") space = ActionSpace::kPerGroup;
  b.actor.num_actions = num_actions(space);
  return b;
}

RlConfig ExperimentConfig::rl_for(std::string_view method) const {
  RlConfig r = rl;
  r.agent = parse_agent_kind(method);
  r.env.door_noise = condition == Condition::kDoorNoise;
  return r;
}

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw ConfigError("experiment.seeds is empty");
  if (methods.empty()) throw ConfigError("experiment.methods is empty");
  const bool bandit_condition = condition == Condition::kCurriculum || condition == Condition::kNoise;
  if (track == Track::kBandit && !bandit_condition) {
    throw ConfigError("condition '" + std::string(to_string(condition)) +
                      "' is not a bandit condition (curriculum, noise)");
  }
  if (track == Track::kGridworld && bandit_condition) {
    throw ConfigError("condition '" + std::string(to_string(condition)) +
                      "' is not a gridworld condition (nonoise, doornoise)");
  }
  if (!action_space.empty() && action_space != "per_class" && action_space != "per_group") {
    throw ConfigError("bandit.action_space must be per_class or per_group");
  }
  try {
    if (track == Track::kBandit) {
      if (condition == Condition::kCurriculum && action_space == "per_group") {
        throw ConfigError("the curriculum condition selects classes; per_group action space is not allowed");
      }
      if (condition == Condition::kNoise && action_space == "per_class") {
        throw ConfigError("the noise condition selects groups; per_class action space is not allowed");
      }
      for (const auto& m : methods) bandit_for(m).validate();
      synthetic.validate();
      if (data_source == DataSource::kMnist) {
        if (!std::filesystem::exists(mnist_images) || !std::filesystem::exists(mnist_labels)) {
          throw ConfigError("MNIST files not found: " + mnist_images.string() + ", " + mnist_labels.string());
        }
      }
      if (data_source == DataSource::kCifar10) {
        if (cifar_batches.empty()) throw ConfigError("data.cifar_batches is empty");
        for (const auto& p : cifar_batches) {
          if (!std::filesystem::exists(p)) throw ConfigError("CIFAR-10 batch not found: " + p.string());
        }
      }
    } else {
      for (const auto& m : methods) rl_for(m).validate();
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace gmc
