#include "tpg/run_config.hpp"

#include <cctype>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json.hpp"
#include "tpg/errors.hpp"

namespace tpg {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, std::initializer_list<const char*> known,
                         const std::string& scope) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw ConfigError("config: unknown key '" + scope + it.key() + "'");
  }
}

template <typename T>
void read_field(const json& j, const char* key, T& out, const std::string& scope) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: bad value for '" + scope + key + "'");
  }
}

void parse_world(const json& j, WorldConfig& w) {
  if (!j.is_object()) throw ConfigError("config: 'world' must be an object");
  reject_unknown_keys(j, {"num_objects", "num_categories"}, "world.");
  read_field(j, "num_objects", w.num_objects, "world.");
  read_field(j, "num_categories", w.num_categories, "world.");
}

void parse_model(const json& j, ModelConfig& m) {
  if (!j.is_object()) throw ConfigError("config: 'model' must be an object");
  reject_unknown_keys(j, {"embed_dim", "hidden_dim"}, "model.");
  read_field(j, "embed_dim", m.embed_dim, "model.");
  read_field(j, "hidden_dim", m.hidden_dim, "model.");
}

void parse_bounds(const json& j, TemperatureBounds& b) {
  if (!j.is_object()) throw ConfigError("config: 'temperature_bounds' must be an object");
  reject_unknown_keys(j, {"tau_min", "tau_max", "tfidf_min", "tfidf_max"},
                      "trainer.temperature_bounds.");
  read_field(j, "tau_min", b.tau_min, "trainer.temperature_bounds.");
  read_field(j, "tau_max", b.tau_max, "trainer.temperature_bounds.");
  read_field(j, "tfidf_min", b.tfidf_min, "trainer.temperature_bounds.");
  read_field(j, "tfidf_max", b.tfidf_max, "trainer.temperature_bounds.");
}

void parse_trainer(const json& j, TrainerConfig& t) {
  if (!j.is_object()) throw ConfigError("config: 'trainer' must be an object");
  reject_unknown_keys(j,
                      {"variant", "tau_global", "parallel_temperatures", "temperature_bounds",
                       "tfidf_strategy", "qgen_lr", "guesser_lr", "batch_size", "max_questions",
                       "max_words", "epochs", "worlds_per_epoch", "divide_advantage_by_length",
                       "parallel_shared_reward", "master_seed"},
                      "trainer.");
  if (j.contains("variant")) {
    std::string name;
    read_field(j, "variant", name, "trainer.");
    t.variant = variant_from_string(name);
  }
  read_field(j, "tau_global", t.tau_global, "trainer.");
  read_field(j, "parallel_temperatures", t.parallel_temperatures, "trainer.");
  if (j.contains("temperature_bounds")) parse_bounds(j.at("temperature_bounds"), t.bounds);
  if (j.contains("tfidf_strategy")) {
    std::string name;
    read_field(j, "tfidf_strategy", name, "trainer.");
    t.tfidf_strategy = tfidf_strategy_from_string(name);
  }
  read_field(j, "qgen_lr", t.qgen_lr, "trainer.");
  read_field(j, "guesser_lr", t.guesser_lr, "trainer.");
  read_field(j, "batch_size", t.batch_size, "trainer.");
  read_field(j, "max_questions", t.max_questions, "trainer.");
  read_field(j, "max_words", t.max_words, "trainer.");
  read_field(j, "epochs", t.epochs, "trainer.");
  read_field(j, "worlds_per_epoch", t.worlds_per_epoch, "trainer.");
  read_field(j, "divide_advantage_by_length", t.divide_advantage_by_length, "trainer.");
  read_field(j, "parallel_shared_reward", t.parallel_shared_reward, "trainer.");
  read_field(j, "master_seed", t.master_seed, "trainer.");
}

}  // namespace

void RunConfig::validate() const {
  if (version != 1) throw ConfigError("config: unsupported version " + std::to_string(version));
  world.validate();
  try {
    model.validate();
    trainer.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (pretrain_episodes < 0) throw ConfigError("config: pretrain_episodes must be >= 0");
  if (pretrain_passes < 0) throw ConfigError("config: pretrain_passes must be >= 0");
  if (!(pretrain_lr > 0.0)) throw ConfigError("config: pretrain_lr must be positive");
  if (eval_episodes < 1) throw ConfigError("config: eval_episodes must be >= 1");
  if (output_dir.empty()) throw ConfigError("config: output_dir must not be empty");
}

RunConfig parse_run_config(const std::string& text) {
  RunConfig c;
  bool blank = true;
  for (char ch : text) blank = blank && (std::isspace(static_cast<unsigned char>(ch)) != 0);
  if (blank) return c;

  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  reject_unknown_keys(j,
                      {"version", "world", "model", "trainer", "pretrain_episodes",
                       "pretrain_passes", "pretrain_lr", "eval_episodes", "output_dir"},
                      "");
  read_field(j, "version", c.version, "");
  if (j.contains("world")) parse_world(j.at("world"), c.world);
  if (j.contains("model")) parse_model(j.at("model"), c.model);
  if (j.contains("trainer")) parse_trainer(j.at("trainer"), c.trainer);
  read_field(j, "pretrain_episodes", c.pretrain_episodes, "");
  read_field(j, "pretrain_passes", c.pretrain_passes, "");
  read_field(j, "pretrain_lr", c.pretrain_lr, "");
  read_field(j, "eval_episodes", c.eval_episodes, "");
  read_field(j, "output_dir", c.output_dir, "");
  return c;
}

std::string serialize_run_config(const RunConfig& c) {
  json j;
  j["version"] = c.version;
  j["world"] = {{"num_objects", c.world.num_objects},
                {"num_categories", c.world.num_categories}};
  j["model"] = {{"embed_dim", c.model.embed_dim}, {"hidden_dim", c.model.hidden_dim}};
  json t;
  t["variant"] = to_string(c.trainer.variant);
  t["tau_global"] = c.trainer.tau_global;
  t["parallel_temperatures"] = c.trainer.parallel_temperatures;
  t["temperature_bounds"] = {{"tau_min", c.trainer.bounds.tau_min},
                             {"tau_max", c.trainer.bounds.tau_max},
                             {"tfidf_min", c.trainer.bounds.tfidf_min},
                             {"tfidf_max", c.trainer.bounds.tfidf_max}};
  t["tfidf_strategy"] = to_string(c.trainer.tfidf_strategy);
  t["qgen_lr"] = c.trainer.qgen_lr;
  t["guesser_lr"] = c.trainer.guesser_lr;
  t["batch_size"] = c.trainer.batch_size;
  t["max_questions"] = c.trainer.max_questions;
  t["max_words"] = c.trainer.max_words;
  t["epochs"] = c.trainer.epochs;
  t["worlds_per_epoch"] = c.trainer.worlds_per_epoch;
  t["divide_advantage_by_length"] = c.trainer.divide_advantage_by_length;
  t["parallel_shared_reward"] = c.trainer.parallel_shared_reward;
  t["master_seed"] = c.trainer.master_seed;
  j["trainer"] = std::move(t);
  j["pretrain_episodes"] = c.pretrain_episodes;
  j["pretrain_passes"] = c.pretrain_passes;
  j["pretrain_lr"] = c.pretrain_lr;
  j["eval_episodes"] = c.eval_episodes;
  j["output_dir"] = c.output_dir;
  return j.dump(2) + "\n";
}

RunConfig load_run_config_file(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open config file: " + path);
  std::ostringstream text;
  text << file.rdbuf();
  return parse_run_config(text.str());
}

}  // namespace tpg
