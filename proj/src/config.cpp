#include "cas4dl/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "cas4dl/sample_grid.hpp"

namespace cas4dl {

std::string to_string(Method method) { return method == Method::CAS ? "cas" : "mc"; }

Method parse_method(std::string_view name) {
  if (name == "cas" || name == "CAS") return Method::CAS;
  if (name == "mc" || name == "MC") return Method::MC;
  throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

std::string to_string(Precision precision) {
  return precision == Precision::Single ? "single" : "double";
}

Precision parse_precision(std::string_view name) {
  if (name == "single") return Precision::Single;
  if (name == "double") return Precision::Double;
  throw std::invalid_argument("unknown precision '" + std::string(name) + "'");
}

Architecture ExperimentConfig::architecture() const {
  return Architecture{dimension, depth, width, output_dim, activation};
}

Eigen::Index ExperimentConfig::effective_grid_size() const {
  return grid_size > 0 ? grid_size : default_grid_size(dimension);
}

bool ExperimentConfig::has_method(Method method) const {
  return std::find(methods.begin(), methods.end(), method) != methods.end();
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& message) {
    throw ConfigError(key + ": " + message);
  };
  if (dimension < 1) fail("target.dimension", "must be >= 1");
  if (output_dim < 1) fail("network.output_dim", "must be >= 1");
  if (is_tabulated()) {
    if (grid_file.empty()) fail("target.grid_file", "required for tabulated targets");
    if (values_file.empty()) fail("target.values_file", "required for tabulated targets");
    if (test_grid_file.empty()) fail("target.test_grid_file", "required for tabulated targets");
    if (test_values_file.empty()) fail("target.test_values_file", "required for tabulated targets");
  } else if (output_dim != 1) {
    fail("network.output_dim", "must be 1 for f1-f4");
  }
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) fail("target.noise_std", "must be >= 0");
  if (grid_size < 0) fail("grid.size", "must be positive");
  if (depth < 0) fail("network.depth", "must be >= 0");
  if (width < 1) fail("network.width", "must be >= 1");
  if (!is_tabulated() && effective_grid_size() < width)
    fail("grid.size", "K < N: the grid must hold at least as many points as the network width");
  if (epochs_per_stage < 0) fail("training.epochs_per_stage", "must be >= 0");
  if (!(learning_rate > 0.0)) fail("training.learning_rate", "must be positive");
  if (!(lr_decay_factor > 0.0 && lr_decay_factor <= 1.0))
    fail("training.lr_decay_factor", "must lie in (0, 1]");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0)) fail("training.adam_beta1", "must lie in [0, 1)");
  if (!(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) fail("training.adam_beta2", "must lie in [0, 1)");
  if (!(adam_epsilon > 0.0)) fail("training.adam_epsilon", "must be positive");
  if (schedule.empty()) fail("sampling.schedule", "must list at least one sample size");
  if (schedule.front() == 0) fail("sampling.schedule", "sample sizes must be positive");
  for (std::size_t i = 1; i < schedule.size(); ++i)
    if (schedule[i] <= schedule[i - 1]) fail("sampling.schedule", "schedule not strictly increasing");
  if (!(eps_tol > 0.0 && eps_tol < 1.0)) fail("sampling.eps_tol", "must lie in (0, 1)");
  if (methods.empty()) fail("sampling.methods", "must name at least one method");
  if (trials < 1) fail("experiment.trials", "must be >= 1");
  if (test_size < 1) fail("experiment.test_size", "must be >= 1");
  if (threads < 1) fail("experiment.threads", "must be >= 1");
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> items;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  if constexpr (std::is_floating_point_v<T>) {
    char* stop = nullptr;
    value = static_cast<T>(std::strtod(begin, &stop));
    if (text.empty() || stop != end) throw ConfigError(key + ": expected a number, got '" + text + "'");
  } else {
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end)
      throw ConfigError(key + ": expected an integer, got '" + text + "'");
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

std::string resolve_path(const std::string& value, const std::filesystem::path& base_dir) {
  if (value.empty()) return value;
  std::filesystem::path p(value);
  if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
  return p.lexically_normal().string();
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

ExperimentConfig parse_config_string(const std::string& text, const std::filesystem::path& base_dir) {
  boost::property_tree::ptree tree;
  try {
    std::istringstream in(text);
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& err) {
    throw ConfigError("line " + std::to_string(err.line()) + ": " + err.message());
  }

  ExperimentConfig c;
  using Setter = std::function<void(const std::string& key, const std::string& value)>;
  const std::map<std::string, std::map<std::string, Setter>> schema = {
      {"target",
       {{"function", [&](auto& k, auto& v) { c.target = parse_function_kind(v); (void)k; }},
        {"dimension", [&](auto& k, auto& v) { c.dimension = parse_number<int>(k, v); }},
        {"grid_file", [&](auto&, auto& v) { c.grid_file = resolve_path(v, base_dir); }},
        {"values_file", [&](auto&, auto& v) { c.values_file = resolve_path(v, base_dir); }},
        {"test_grid_file", [&](auto&, auto& v) { c.test_grid_file = resolve_path(v, base_dir); }},
        {"test_values_file", [&](auto&, auto& v) { c.test_values_file = resolve_path(v, base_dir); }},
        {"noise_std", [&](auto& k, auto& v) { c.noise_std = parse_number<double>(k, v); }}}},
      {"grid",
       {{"size", [&](auto& k, auto& v) { c.grid_size = parse_number<Eigen::Index>(k, v); }},
        {"seed", [&](auto& k, auto& v) { c.grid_seed = parse_number<std::uint64_t>(k, v); }}}},
      {"network",
       {{"depth", [&](auto& k, auto& v) { c.depth = parse_number<int>(k, v); }},
        {"width", [&](auto& k, auto& v) { c.width = parse_number<int>(k, v); }},
        {"output_dim", [&](auto& k, auto& v) { c.output_dim = parse_number<int>(k, v); }},
        {"activation", [&](auto&, auto& v) { c.activation = parse_activation(v); }}}},
      {"training",
       {{"epochs_per_stage", [&](auto& k, auto& v) { c.epochs_per_stage = parse_number<long>(k, v); }},
        {"learning_rate", [&](auto& k, auto& v) { c.learning_rate = parse_number<double>(k, v); }},
        {"lr_decay_factor", [&](auto& k, auto& v) { c.lr_decay_factor = parse_number<double>(k, v); }},
        {"adam_beta1", [&](auto& k, auto& v) { c.adam_beta1 = parse_number<double>(k, v); }},
        {"adam_beta2", [&](auto& k, auto& v) { c.adam_beta2 = parse_number<double>(k, v); }},
        {"adam_epsilon", [&](auto& k, auto& v) { c.adam_epsilon = parse_number<double>(k, v); }},
        {"precision", [&](auto&, auto& v) { c.precision = parse_precision(v); }}}},
      {"sampling",
       {{"schedule",
         [&](auto& k, auto& v) {
           c.schedule.clear();
           for (const auto& item : split_list(v)) c.schedule.push_back(parse_number<std::size_t>(k, item));
         }},
        {"eps_tol", [&](auto& k, auto& v) { c.eps_tol = parse_number<double>(k, v); }},
        {"methods",
         [&](auto&, auto& v) {
           c.methods.clear();
           for (const auto& item : split_list(v)) c.methods.push_back(parse_method(item));
         }}}},
      {"experiment",
       {{"trials", [&](auto& k, auto& v) { c.trials = parse_number<int>(k, v); }},
        {"seed", [&](auto& k, auto& v) { c.seed = parse_number<std::uint64_t>(k, v); }},
        {"test_size", [&](auto& k, auto& v) { c.test_size = parse_number<Eigen::Index>(k, v); }},
        {"test_seed", [&](auto& k, auto& v) { c.test_seed = parse_number<std::uint64_t>(k, v); }},
        {"threads", [&](auto& k, auto& v) { c.threads = parse_number<int>(k, v); }}}},
      {"output",
       {{"wall_time", [&](auto& k, auto& v) { c.record_wall_time = parse_bool(k, v); }},
        {"checkpoints", [&](auto& k, auto& v) { c.checkpoints = parse_bool(k, v); }}}},
  };

  for (const auto& [section, entries] : tree) {
    if (entries.empty() && !entries.data().empty())
      throw ConfigError(section + ": key outside of any [section]");
    const auto found = schema.find(section);
    if (found == schema.end()) throw ConfigError("[" + section + "]: unknown section");
    for (const auto& [key, node] : entries) {
      const std::string full = section + "." + key;
      const auto setter = found->second.find(key);
      if (setter == found->second.end()) throw ConfigError(full + ": unknown key");
      try {
        setter->second(full, trim(node.data()));
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception& err) {
        throw ConfigError(full + ": " + err.what());
      }
    }
  }
  c.validate();
  return c;
}

ExperimentConfig parse_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_string(buffer.str(), file.parent_path());
}

std::string dump_config(const ExperimentConfig& c) {
  std::ostringstream out;
  auto join = [](const auto& items, auto&& fmt) {
    std::string s;
    for (std::size_t i = 0; i < items.size(); ++i) s += (i ? "," : "") + fmt(items[i]);
    return s;
  };
  out << "[target]\n"
      << "function = " << to_string(c.target) << "\n"
      << "dimension = " << c.dimension << "\n";
  if (c.is_tabulated()) {
    out << "grid_file = " << c.grid_file << "\n"
        << "values_file = " << c.values_file << "\n"
        << "test_grid_file = " << c.test_grid_file << "\n"
        << "test_values_file = " << c.test_values_file << "\n";
  }
  out << "noise_std = " << format_double(c.noise_std) << "\n\n"
      << "[grid]\n"
      << "size = " << (c.is_tabulated() ? c.grid_size : c.effective_grid_size()) << "\n"
      << "seed = " << c.grid_seed << "\n\n"
      << "[network]\n"
      << "depth = " << c.depth << "\n"
      << "width = " << c.width << "\n"
      << "output_dim = " << c.output_dim << "\n"
      << "activation = " << to_string(c.activation) << "\n\n"
      << "[training]\n"
      << "epochs_per_stage = " << c.epochs_per_stage << "\n"
      << "learning_rate = " << format_double(c.learning_rate) << "\n"
      << "lr_decay_factor = " << format_double(c.lr_decay_factor) << "\n"
      << "adam_beta1 = " << format_double(c.adam_beta1) << "\n"
      << "adam_beta2 = " << format_double(c.adam_beta2) << "\n"
      << "adam_epsilon = " << format_double(c.adam_epsilon) << "\n"
      << "precision = " << to_string(c.precision) << "\n\n"
      << "[sampling]\n"
      << "schedule = " << join(c.schedule, [](std::size_t m) { return std::to_string(m); }) << "\n"
      << "eps_tol = " << format_double(c.eps_tol) << "\n"
      << "methods = " << join(c.methods, [](Method m) { return to_string(m); }) << "\n\n"
      << "[experiment]\n"
      << "trials = " << c.trials << "\n"
      << "seed = " << c.seed << "\n"
      << "test_size = " << c.test_size << "\n"
      << "test_seed = " << c.test_seed << "\n"
      << "threads = " << c.threads << "\n\n"
      << "[output]\n"
      << "wall_time = " << (c.record_wall_time ? "true" : "false") << "\n"
      << "checkpoints = " << (c.checkpoints ? "true" : "false") << "\n";
  return out.str();
}

}  // namespace cas4dl
