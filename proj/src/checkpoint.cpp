#include "tpg/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "tpg/errors.hpp"

namespace tpg {

namespace {

constexpr const char* kMagic = "tpg-checkpoint v1";

std::string hex_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_double(const std::string& token, const std::string& where) {
  const char* s = token.c_str();
  char* end = nullptr;
  const double v = std::strtod(s, &end);
  if (end == s || *end != '\0') {
    throw ConfigError("checkpoint: bad number '" + token + "' in " + where);
  }
  return v;
}

void write_store(std::ostream& out, const char* label, const ParamStore& store) {
  out << "store " << label << ' ' << store.block_count() << '\n';
  for (BlockId id = 0; id < store.block_count(); ++id) {
    const ParamBlock& blk = store.block(id);
    out << "block " << blk.name << ' ' << blk.rows << ' ' << blk.cols << '\n';
    for (int i = 0; i < blk.size(); ++i) {
      if (i) out << ' ';
      out << hex_double(blk.value[static_cast<size_t>(i)]);
    }
    out << '\n';
  }
}

void read_store(std::istream& in, const std::string& label, ParamStore& store) {
  std::string word;
  std::string name;
  int count = 0;
  if (!(in >> word >> name >> count) || word != "store" || name != label) {
    throw ConfigError("checkpoint: expected store section '" + label + "'");
  }
  if (count != store.block_count()) {
    throw ConfigError("checkpoint: store '" + label + "' has " + std::to_string(count) +
                      " blocks, model expects " + std::to_string(store.block_count()));
  }
  for (int i = 0; i < count; ++i) {
    int rows = 0;
    int cols = 0;
    if (!(in >> word >> name >> rows >> cols) || word != "block") {
      throw ConfigError("checkpoint: malformed block header in store '" + label + "'");
    }
    if (!store.has(name)) {
      throw ConfigError("checkpoint: store '" + label + "' has no block named '" + name + "'");
    }
    ParamBlock& blk = store.block(store.id_of(name));
    if (blk.rows != rows || blk.cols != cols) {
      throw ConfigError("checkpoint: block '" + label + "." + name + "' is " +
                        std::to_string(rows) + "x" + std::to_string(cols) + ", model expects " +
                        std::to_string(blk.rows) + "x" + std::to_string(blk.cols));
    }
    for (int j = 0; j < blk.size(); ++j) {
      std::string tok;
      if (!(in >> tok)) {
        throw ConfigError("checkpoint: truncated values for block '" + name + "'");
      }
      blk.value[static_cast<size_t>(j)] = parse_double(tok, "block " + name);
    }
  }
}

}  // namespace

void save_checkpoint(const std::string& path, const QGenPolicy& qgen, const GuesserNet& guesser,
                     const FrequencyStats& stats, const BaselineTracker& tracker,
                     int epochs_completed) {
  std::ostringstream out;
  out << kMagic << '\n';
  out << "vocab " << qgen.vocab().size() << '\n';
  out << "epochs " << epochs_completed << '\n';
  out << "baseline " << tracker.episodes << ' ' << hex_double(tracker.reward_sum) << '\n';
  out << "stats " << stats.vocab_size() << ' ' << stats.dialogues() << '\n';
  out << "counts";
  for (std::int64_t c : stats.counts()) out << ' ' << c;
  out << '\n';
  out << "presence";
  for (std::int64_t p : stats.presences()) out << ' ' << p;
  out << '\n';
  write_store(out, "qgen", qgen.params());
  write_store(out, "guesser", guesser.params());
  out << "end\n";

  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open checkpoint for writing: " + path);
  file << out.str();
  if (!file) throw IoError("failed writing checkpoint: " + path);
}

CheckpointState load_checkpoint(const std::string& path, QGenPolicy& qgen, GuesserNet& guesser) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open checkpoint: " + path);

  std::string magic;
  std::getline(file, magic);
  if (magic != kMagic) throw ConfigError("checkpoint: unsupported format or version: " + path);

  std::string word;
  int vocab_size = 0;
  if (!(file >> word >> vocab_size) || word != "vocab") {
    throw ConfigError("checkpoint: missing vocab line");
  }
  if (vocab_size != qgen.vocab().size()) {
    throw ConfigError("checkpoint: vocabulary size " + std::to_string(vocab_size) +
                      ", model expects " + std::to_string(qgen.vocab().size()));
  }

  CheckpointState state{FrequencyStats(vocab_size), BaselineTracker{}, 0};
  if (!(file >> word >> state.epochs_completed) || word != "epochs") {
    throw ConfigError("checkpoint: missing epochs line");
  }
  std::string sum_tok;
  if (!(file >> word >> state.tracker.episodes >> sum_tok) || word != "baseline") {
    throw ConfigError("checkpoint: missing baseline line");
  }
  state.tracker.reward_sum = parse_double(sum_tok, "baseline");

  int stats_size = 0;
  std::int64_t dialogues = 0;
  if (!(file >> word >> stats_size >> dialogues) || word != "stats") {
    throw ConfigError("checkpoint: missing stats line");
  }
  if (stats_size != vocab_size) throw ConfigError("checkpoint: stats size != vocab size");
  std::vector<std::int64_t> counts(static_cast<size_t>(stats_size));
  std::vector<std::int64_t> presence(static_cast<size_t>(stats_size));
  if (!(file >> word) || word != "counts") throw ConfigError("checkpoint: missing counts line");
  for (std::int64_t& c : counts) {
    if (!(file >> c)) throw ConfigError("checkpoint: truncated counts");
  }
  if (!(file >> word) || word != "presence") {
    throw ConfigError("checkpoint: missing presence line");
  }
  for (std::int64_t& p : presence) {
    if (!(file >> p)) throw ConfigError("checkpoint: truncated presence");
  }
  state.stats.restore(std::move(counts), std::move(presence), dialogues);

  read_store(file, "qgen", qgen.params());
  read_store(file, "guesser", guesser.params());
  if (!(file >> word) || word != "end") throw ConfigError("checkpoint: missing end marker");
  return state;
}

}  // namespace tpg
