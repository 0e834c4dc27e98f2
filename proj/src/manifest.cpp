// SPDX-License-Identifier: Apache-2.0
#include "rlpga/manifest.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rlpga/errors.hpp"

namespace rlpga {

using nlohmann::json;

namespace {

json config_to_json(const TrainConfig& c) {
  json j;
  j["variant"] = to_string(c.variant);
  j["alpha"] = c.alpha;
  j["beta"] = c.beta;
  j["gamma"] = c.gamma;
  j["k"] = c.k;
  j["t1"] = to_string(c.t1);
  j["weight_decay"] = c.weight_decay;
  j["lr_critic"] = c.lr_critic;
  j["lr_f"] = c.lr_f;
  j["lr_h"] = c.lr_h;
  j["n_critic"] = c.n_critic;
  j["gp_coeff"] = c.gp_coeff;
  j["steps"] = c.steps;
  j["batch"] = c.batch;
  j["seed"] = c.seed;
  j["f_hidden"] = c.arch.f_hidden;
  j["critic_hidden"] = c.arch.critic_hidden;
  j["metric"] = c.metric ? json(to_string(*c.metric)) : json(nullptr);
  j["stratified"] = c.stratified;
  j["allow_small_batch"] = c.allow_small_batch;
  j["eval_interval"] = c.eval_interval;
  j["ce_warmup"] = c.ce_warmup;
  return j;
}

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.variant = parse_variant(j.at("variant").get<std::string>());
  c.alpha = j.at("alpha").get<double>();
  c.beta = j.at("beta").get<double>();
  c.gamma = j.at("gamma").get<double>();
  c.k = j.at("k").get<std::size_t>();
  c.t1 = parse_bandwidth(j.at("t1").get<std::string>());
  c.weight_decay = j.at("weight_decay").get<double>();
  c.lr_critic = j.at("lr_critic").get<double>();
  c.lr_f = j.at("lr_f").get<double>();
  c.lr_h = j.at("lr_h").get<double>();
  c.n_critic = j.at("n_critic").get<int>();
  c.gp_coeff = j.at("gp_coeff").get<double>();
  c.steps = j.at("steps").get<long>();
  c.batch = j.at("batch").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.arch.f_hidden = j.at("f_hidden").get<std::vector<std::size_t>>();
  c.arch.critic_hidden = j.at("critic_hidden").get<std::vector<std::size_t>>();
  if (!j.at("metric").is_null()) c.metric = parse_metric(j.at("metric").get<std::string>());
  c.stratified = j.at("stratified").get<bool>();
  c.allow_small_batch = j.at("allow_small_batch").get<bool>();
  c.eval_interval = j.at("eval_interval").get<long>();
  c.ce_warmup = j.at("ce_warmup").get<long>();
  return c;
}

json noise_to_json(const NoiseSpec& n) {
  return {{"kind", to_string(n.kind)},
          {"ratio", n.ratio},
          {"pair_map", pair_map_to_string(n.pair_map)},
          {"seed", n.seed}};
}

NoiseSpec noise_from_json(const json& j) {
  NoiseSpec n;
  n.kind = parse_noise_kind(j.at("kind").get<std::string>());
  n.ratio = j.at("ratio").get<double>();
  const auto map = j.at("pair_map").get<std::string>();
  if (!map.empty()) n.pair_map = parse_pair_map(map);
  n.seed = j.at("seed").get<std::uint64_t>();
  return n;
}

}  // namespace

std::string manifest_to_json(const RunManifest& m) {
  json j;
  j["tool_version"] = m.tool_version;
  j["started_at"] = m.started_at;
  j["preset"] = m.preset;
  j["out_dir"] = m.out_dir;
  j["dump_graphs"] = m.dump_graphs;
  j["dataset"] = {{"kind", m.dataset.kind},
                  {"src_csv", m.dataset.src_csv},
                  {"tgt_csv", m.dataset.tgt_csv},
                  {"tgt_eval_csv", m.dataset.tgt_eval_csv}};
  j["noise"] = noise_to_json(m.noise);
  j["config"] = config_to_json(m.config);
  return j.dump(2) + "\n";
}

RunManifest manifest_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    RunManifest m;
    m.tool_version = j.at("tool_version").get<std::string>();
    m.started_at = j.at("started_at").get<std::string>();
    m.preset = j.at("preset").get<std::string>();
    m.out_dir = j.at("out_dir").get<std::string>();
    m.dump_graphs = j.at("dump_graphs").get<bool>();
    const json& d = j.at("dataset");
    m.dataset.kind = d.at("kind").get<std::string>();
    m.dataset.src_csv = d.at("src_csv").get<std::string>();
    m.dataset.tgt_csv = d.at("tgt_csv").get<std::string>();
    m.dataset.tgt_eval_csv = d.at("tgt_eval_csv").get<std::string>();
    m.noise = noise_from_json(j.at("noise"));
    m.config = config_from_json(j.at("config"));
    return m;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("manifest: ") + e.what());
  }
}

void write_manifest(const std::string& path, const RunManifest& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << manifest_to_json(m);
}

RunManifest read_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open manifest " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return manifest_from_json(ss.str());
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace rlpga
