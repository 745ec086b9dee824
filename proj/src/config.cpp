#include "seqshift/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "seqshift/textcfg.hpp"

namespace seqshift {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

TextConfig TextConfig::parse(const std::string& text) {
  TextConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("bad section header on line " +
                                    std::to_string(line_no));
      section = trim(line.substr(1, line.size() - 2));
      if (!cfg.sections.count(section)) cfg.section_order.push_back(section);
      cfg.sections[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("expected key = value on line " +
                                  std::to_string(line_no));
    cfg.sections[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return cfg;
}

bool TextConfig::has(const std::string& section, const std::string& key) const {
  const auto it = sections.find(section);
  return it != sections.end() && it->second.count(key);
}

const std::string& TextConfig::get(const std::string& section,
                                   const std::string& key) const {
  const auto it = sections.find(section);
  if (it == sections.end())
    throw std::invalid_argument("missing config section [" + section + "]");
  const auto kt = it->second.find(key);
  if (kt == it->second.end())
    throw std::invalid_argument("missing config key '" + key + "' in [" + section + "]");
  return kt->second;
}

std::string TextConfig::get_or(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  return has(section, key) ? get(section, key) : fallback;
}

long long TextConfig::get_int(const std::string& section, const std::string& key) const {
  return std::stoll(get(section, key));
}

double TextConfig::get_double(const std::string& section, const std::string& key) const {
  return std::stod(get(section, key));
}

ExperimentConfig ExperimentConfig::from_text(const std::string& text) {
  const TextConfig cfg = TextConfig::parse(text);
  ExperimentConfig out;
  out.preset = cfg.get_or("experiment", "preset", "");
  out.spec_path = cfg.get_or("experiment", "spec", "");
  out.sequence_dir = cfg.get_or("experiment", "sequence_dir", "");
  out.base_corpus = cfg.get_or("experiment", "base_corpus", "");
  out.methods = split_list(cfg.get_or("experiment", "methods", ""));
  out.architectures = split_list(cfg.get_or("experiment", "archs", "conv2"));
  for (const auto& s : split_list(cfg.get_or("experiment", "seeds", "1")))
    out.seeds.push_back(std::stoull(s));
  out.scale_factor = static_cast<int>(std::stoll(cfg.get_or("experiment", "scale_factor", "4")));
  out.sample_scale = static_cast<int>(std::stoll(cfg.get_or("experiment", "sample_scale", "4")));
  out.downscale_images = cfg.get_or("experiment", "downscale_images", "1") != "0";
  out.workers = static_cast<int>(std::stoll(cfg.get_or("experiment", "workers", "1")));
  out.out_dir = cfg.get_or("experiment", "out", "runs");
  out.epochs = static_cast<int>(std::stoll(cfg.get_or("train", "epochs", "30")));
  out.batch_size = static_cast<int>(std::stoll(cfg.get_or("train", "batch_size", "64")));
  out.learning_rate = std::stod(cfg.get_or("train", "learning_rate", "0.05"));
  out.momentum = std::stod(cfg.get_or("train", "momentum", "0.9"));
  out.weight_decay = std::stod(cfg.get_or("train", "weight_decay", "0.0005"));
  out.augment = cfg.get_or("train", "augment", "1") != "0";
  return out;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str());
}

std::string ExperimentConfig::canonical_text() const {
  std::ostringstream out;
  out << "[experiment]\n";
  if (!preset.empty()) out << "preset = " << preset << "\n";
  if (!spec_path.empty()) out << "spec = " << spec_path << "\n";
  if (!sequence_dir.empty()) out << "sequence_dir = " << sequence_dir << "\n";
  if (!base_corpus.empty()) out << "base_corpus = " << base_corpus << "\n";
  out << "methods =";
  for (std::size_t i = 0; i < methods.size(); ++i) out << (i ? "," : " ") << methods[i];
  out << "\narchs =";
  for (std::size_t i = 0; i < architectures.size(); ++i)
    out << (i ? "," : " ") << architectures[i];
  out << "\nscale_factor = " << scale_factor;
  out << "\nsample_scale = " << sample_scale;
  out << "\ndownscale_images = " << (downscale_images ? 1 : 0);
  out << "\n[train]\n";
  out << "epochs = " << epochs << "\n";
  out << "batch_size = " << batch_size << "\n";
  out << "learning_rate = " << learning_rate << "\n";
  out << "momentum = " << momentum << "\n";
  out << "weight_decay = " << weight_decay << "\n";
  out << "augment = " << (augment ? 1 : 0) << "\n";
  return out.str();
}

}  // namespace seqshift
