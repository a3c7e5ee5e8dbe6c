/*
 * Copyright 2026 The ofdma-maxmin Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// File formats.
//
//   rate CSV        "# rates N K" header line, then N rows of K comma-separated
//                   rates (bits per channel use).
//   channel JSON    {"gains": N x K, "mask": ..., "noise": ...}. mask and noise
//                   may be a scalar, a length-K array (shared by all users) or
//                   an N x K array; noise defaults to 1.
//   allocation CSV  "# allocation N K" header line, then N rows of K shares.
//   sim config JSON see parse_sim_config.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ofdma/error.hpp"
#include "ofdma/format.hpp"
#include "ofdma/matrix.hpp"
#include "ofdma/maxmin.hpp"
#include "ofdma/rates.hpp"
#include "ofdma/sim.hpp"

namespace ofdma::io {

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline double parse_double(std::string_view token, const std::string& field) {
  token = trim(token);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (token.empty() || ec != std::errc() || ptr != token.data() + token.size()) {
    throw InputError(field, "cannot parse number '" + std::string(token) + "'");
  }
  return v;
}

inline std::size_t parse_size(std::string_view token, const std::string& field) {
  token = trim(token);
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (token.empty() || ec != std::errc() || ptr != token.data() + token.size()) {
    throw InputError(field, "cannot parse count '" + std::string(token) + "'");
  }
  return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// Reads a "# <tag> N K" headed matrix.
inline Matrix read_tagged_matrix(std::istream& in, std::string_view tag) {
  const std::string field(tag);
  std::string line;
  std::size_t line_no = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty()) continue;
    std::istringstream hs{std::string(t)};
    std::string hash, word, n_tok, k_tok, extra;
    hs >> hash >> word >> n_tok >> k_tok;
    if (hash != "#" || word != tag || n_tok.empty() || k_tok.empty() || (hs >> extra)) {
      throw InputError(field, "line " + std::to_string(line_no) + ": expected header '# " + field + " N K'");
    }
    rows = parse_size(n_tok, field);
    cols = parse_size(k_tok, field);
    if (rows == 0 || cols == 0) throw InputError(field, "header dimensions must be positive");
    have_header = true;
    break;
  }
  if (!have_header) throw InputError(field, "empty input");

  Matrix m(rows, cols);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (row == rows) throw InputError(field, "line " + std::to_string(line_no) + ": more than " + std::to_string(rows) + " rows");
    const auto tokens = split(t, ',');
    if (tokens.size() != cols) {
      throw InputError(field, "line " + std::to_string(line_no) + ": expected " + std::to_string(cols) +
                                  " values, got " + std::to_string(tokens.size()));
    }
    for (std::size_t k = 0; k < cols; ++k) {
      m(row, k) = parse_double(tokens[k], field + " line " + std::to_string(line_no));
    }
    ++row;
  }
  if (row != rows) {
    throw InputError(field, "expected " + std::to_string(rows) + " rows, got " + std::to_string(row));
  }
  return m;
}

inline void write_tagged_matrix(std::ostream& os, std::string_view tag, const Matrix& m) {
  os << "# " << tag << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) os << ',';
      os << format_double(m(i, j));
    }
    os << '\n';
  }
}

inline Matrix broadcast(const nlohmann::json& j, std::size_t rows, std::size_t cols, const std::string& field) {
  try {
    if (j.is_number()) return Matrix(rows, cols, j.get<double>());
    if (!j.is_array()) throw InputError(field, "must be a number or an array");
    if (j.size() == cols && (j.empty() || j.front().is_number())) {
      Matrix m(rows, cols);
      const auto row = j.get<std::vector<double>>();
      for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t k = 0; k < cols; ++k) m(i, k) = row[k];
      }
      return m;
    }
    Matrix m = Matrix::from_rows(j.get<std::vector<std::vector<double>>>());
    if (m.rows() != rows || m.cols() != cols) {
      throw InputError(field, "expected " + std::to_string(rows) + " x " + std::to_string(cols) + " entries");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(field, e.what());
  } catch (const InputError& e) {
    if (e.field() == field) throw;
    throw InputError(field, e.what());
  }
}

}  // namespace detail

inline RateMatrix read_rate_csv(std::istream& in) {
  return RateMatrix(detail::read_tagged_matrix(in, "rates"));
}

inline void write_rate_csv(std::ostream& os, const RateMatrix& r) {
  detail::write_tagged_matrix(os, "rates", r.values());
}

inline ChannelRealization read_channel_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("channel", "expected a JSON object");
  if (!j.contains("gains")) throw InputError("gains", "missing");
  if (!j.contains("mask")) throw InputError("mask", "missing");
  Matrix gain;
  try {
    gain = Matrix::from_rows(j.at("gains").get<std::vector<std::vector<double>>>());
  } catch (const nlohmann::json::exception& e) {
    throw InputError("gains", e.what());
  } catch (const InputError& e) {
    throw InputError("gains", e.what());
  }
  const std::size_t rows = gain.rows();
  const std::size_t cols = gain.cols();
  ChannelRealization ch{std::move(gain), detail::broadcast(j.at("mask"), rows, cols, "mask"),
                        j.contains("noise") ? detail::broadcast(j.at("noise"), rows, cols, "noise")
                                            : Matrix(rows, cols, 1.0)};
  ch.validate();
  return ch;
}

// Rates from either file kind: JSON channel files go through the rate formula,
// anything else is read as a rate CSV.
inline RateMatrix load_rates(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("channel_file", "cannot open " + path.string());
  if (path.extension() == ".json") {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw InputError("channel_file", e.what());
    }
    return compute_rate_matrix(read_channel_json(j));
  }
  return read_rate_csv(in);
}

inline void write_allocation_csv(std::ostream& os, const AllocationMatrix& a) {
  detail::write_tagged_matrix(os, "allocation", a.alpha);
}

inline AllocationMatrix read_allocation_csv(std::istream& in) {
  AllocationMatrix a{detail::read_tagged_matrix(in, "allocation")};
  a.validate();
  return a;
}

// "1,1.25" -> {1, 1.25}
inline std::vector<double> parse_list(std::string_view text, const std::string& field) {
  std::vector<double> out;
  for (auto tok : detail::split(text, ',')) out.push_back(detail::parse_double(tok, field));
  return out;
}

// ---------------------------------------------------------------------------
// Simulation config
//
// {
//   "schema_version": 1,
//   "case": "case1" | "case2",
//   "n_bins": 64, "n_trials": 10000, "rng_seed": 1,
//   "gamma_grid": [0.1, ...], "outage_probs": [0.05, 0.1],
//   "histogram_bins": 40,
//   "groups": [ {"name": "g1", "size": 8, "snr_db": 20, "kind": "data", "weight": 1},
//               {"name": "voice", "size": 4, "snr_db": 5, "kind": "voice", "rmin": 1} ]
// }

inline constexpr int kSimSchemaVersion = 1;

enum class SimCase { Case1, Case2 };

struct SimJob {
  SimCase which = SimCase::Case1;
  sim::SimConfig config;
};

inline SimJob parse_sim_config(const nlohmann::json& j) {
  try {
    if (!j.is_object()) throw InputError("config", "expected a JSON object");
    if (!j.contains("schema_version")) throw InputError("schema_version", "missing");
    const int version = j.at("schema_version").get<int>();
    if (version != kSimSchemaVersion) {
      throw InputError("schema_version", "unsupported version " + std::to_string(version));
    }
    SimJob job;
    const std::string which = j.value("case", "case1");
    if (which == "case1") {
      job.which = SimCase::Case1;
    } else if (which == "case2") {
      job.which = SimCase::Case2;
    } else {
      throw InputError("case", "expected 'case1' or 'case2', got '" + which + "'");
    }
    auto& cfg = job.config;
    cfg.n_bins = j.value("n_bins", std::size_t{64});
    cfg.n_trials = j.value("n_trials", std::size_t{10000});
    cfg.rng_seed = j.value("rng_seed", std::uint64_t{0});
    cfg.histogram_bins = j.value("histogram_bins", std::size_t{40});
    cfg.threads = j.value("threads", std::size_t{0});
    if (!j.contains("gamma_grid")) throw InputError("gamma_grid", "missing");
    cfg.gamma_grid = j.at("gamma_grid").get<std::vector<double>>();
    cfg.outage_probs = j.value("outage_probs", std::vector<double>{});
    if (!j.contains("groups")) throw InputError("groups", "missing");
    for (const auto& g : j.at("groups")) {
      sim::GroupSpec spec;
      spec.name = g.value("name", "");
      spec.size = g.at("size").get<std::size_t>();
      spec.snr_db = g.at("snr_db").get<double>();
      const std::string kind = g.value("kind", "data");
      if (kind == "data") {
        spec.kind = sim::GroupKind::Data;
        spec.weight_or_rmin = g.value("weight", 1.0);
      } else if (kind == "voice") {
        spec.kind = sim::GroupKind::Voice;
        // No default: the rate floor must be stated explicitly.
        if (!g.contains("rmin")) throw InputError("groups", "voice group '" + spec.name + "' needs 'rmin'");
        spec.weight_or_rmin = g.at("rmin").get<double>();
      } else {
        throw InputError("groups", "kind must be 'data' or 'voice', got '" + kind + "'");
      }
      cfg.groups.push_back(std::move(spec));
    }
    cfg.validate();
    return job;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("config", e.what());
  }
}

inline nlohmann::json to_json(const SimJob& job) {
  const auto& cfg = job.config;
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : cfg.groups) {
    nlohmann::json o{{"name", g.name}, {"size", g.size}, {"snr_db", g.snr_db},
                     {"kind", g.kind == sim::GroupKind::Data ? "data" : "voice"}};
    o[g.kind == sim::GroupKind::Data ? "weight" : "rmin"] = g.weight_or_rmin;
    groups.push_back(std::move(o));
  }
  return {{"schema_version", kSimSchemaVersion},
          {"case", job.which == SimCase::Case1 ? "case1" : "case2"},
          {"n_bins", cfg.n_bins},
          {"n_trials", cfg.n_trials},
          {"rng_seed", cfg.rng_seed},
          {"histogram_bins", cfg.histogram_bins},
          {"gamma_grid", cfg.gamma_grid},
          {"outage_probs", cfg.outage_probs},
          {"groups", std::move(groups)}};
}

// 64-bit FNV-1a; stable across platforms, used for config fingerprints.
inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = kDigits[v & 0xf];
  return s;
}

// Writes each file to "<name>.tmp" first and renames only after every file
// was written; on failure the temporaries are removed and nothing is left.
class AtomicBundle {
 public:
  explicit AtomicBundle(std::filesystem::path dir) : dir_(std::move(dir)) {}

  AtomicBundle(const AtomicBundle&) = delete;
  AtomicBundle& operator=(const AtomicBundle&) = delete;

  ~AtomicBundle() {
    std::error_code ec;
    for (const auto& p : pending_) std::filesystem::remove(tmp_path(p), ec);
  }

  void add(const std::string& name, const std::function<void(std::ostream&)>& writer) {
    std::filesystem::create_directories(dir_);
    const auto path = dir_ / name;
    pending_.push_back(path);
    std::ofstream out(tmp_path(path), std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp_path(path).string());
    writer(out);
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp_path(path).string());
  }

  void commit() {
    for (const auto& p : pending_) std::filesystem::rename(tmp_path(p), p);
    pending_.clear();
  }

 private:
  static std::filesystem::path tmp_path(const std::filesystem::path& p) {
    auto t = p;
    t += ".tmp";
    return t;
  }

  std::filesystem::path dir_;
  std::vector<std::filesystem::path> pending_;
};

}  // namespace ofdma::io
