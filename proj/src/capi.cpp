// Copyright 2026 The pmark Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "pmark.h"
#include "pmark/errors.hpp"
#include "pmark/selection.hpp"
#include "pmark/verify.hpp"
#include "records.hpp"

struct pmark_key {
  pmark::MasterKey key;
  std::string bytes;  // file contents the fingerprint is taken over
};

struct pmark_engine {
  std::unique_ptr<pmark::Engine> engine;
};

namespace {

thread_local std::string g_last_error;

struct BadArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

template <class Fn>
pmark_status guarded(Fn&& fn) noexcept {
  g_last_error.clear();
  try {
    fn();
    return PMARK_OK;
  } catch (const pmark::Error& e) {
    g_last_error = e.what();
    return static_cast<pmark_status>(e.code());
  } catch (const BadArgument& e) {
    g_last_error = e.what();
    return PMARK_ERR_INVALID_ARGUMENT;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PMARK_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return PMARK_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw BadArgument(what);
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::string read_file(const char* path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) pmark::fail(pmark::Errc::kIo, std::string("cannot open ") + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

pmark_key* new_key(const pmark::MasterKey& key) {
  pmark::generate_pivots(key);  // validates the shape
  return new pmark_key{key, pmark::key_to_json(key)};
}

pmark::Mode mode_arg(const char* mode) {
  require(mode != nullptr, "mode is null");
  return pmark::parse_mode(mode);
}

}  // namespace

extern "C" {

const char* pmark_version(void) { return "1.0.0"; }

const char* pmark_status_name(pmark_status status) {
  switch (status) {
    case PMARK_OK: return "OK";
    case PMARK_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case PMARK_ERR_INTERNAL: return "Internal";
    default: break;
  }
  if (status >= PMARK_ERR_ZERO_VECTOR && status <= PMARK_ERR_PARSE) {
    return pmark::errc_name(static_cast<pmark::Errc>(status)).data();
  }
  return "Unknown";
}

const char* pmark_last_error(void) { return g_last_error.c_str(); }

void pmark_string_free(char* s) { std::free(s); }

pmark_status pmark_key_create(uint64_t seed, size_t dim, size_t channels, pmark_key** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    *out = new_key(pmark::MasterKey{seed, dim, channels});
  });
}

pmark_status pmark_key_create_random(size_t dim, size_t channels, pmark_key** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    std::random_device entropy;
    const std::uint64_t seed = (static_cast<std::uint64_t>(entropy()) << 32) | entropy();
    *out = new_key(pmark::MasterKey{seed, dim, channels});
  });
}

pmark_status pmark_key_load(const char* path, pmark_key** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "path or out is null");
    std::string bytes = read_file(path);
    const pmark::MasterKey key = pmark::key_from_json(bytes);
    pmark::generate_pivots(key);
    *out = new pmark_key{key, std::move(bytes)};
  });
}

pmark_status pmark_key_save(const pmark_key* key, const char* path) {
  return guarded([&] {
    require(key != nullptr && path != nullptr, "key or path is null");
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) pmark::fail(pmark::Errc::kIo, std::string("cannot write ") + path);
    f << key->bytes;
    if (!f.flush()) pmark::fail(pmark::Errc::kIo, std::string("write failed: ") + path);
  });
}

void pmark_key_free(pmark_key* key) { delete key; }

size_t pmark_key_dim(const pmark_key* key) { return key != nullptr ? key->key.dim : 0; }

size_t pmark_key_channels(const pmark_key* key) {
  return key != nullptr ? key->key.channels : 0;
}

pmark_status pmark_key_fingerprint(const pmark_key* key, char out[17]) {
  return guarded([&] {
    require(key != nullptr && out != nullptr, "key or out is null");
    const std::string fp = pmark::fingerprint(key->bytes);
    std::memcpy(out, fp.c_str(), 17);
  });
}

pmark_status pmark_key_pivot(const pmark_key* key, size_t channel, double* out, size_t len) {
  return guarded([&] {
    require(key != nullptr && out != nullptr, "key or out is null");
    require(len == key->key.dim, "buffer length must equal the key dimension");
    const pmark::PivotSet pivots = pmark::generate_pivots(key->key);
    if (channel >= pivots.channel_count()) {
      pmark::fail(pmark::Errc::kChannelOutOfRange, "channel index out of range");
    }
    const auto c = pivots[channel].components();
    std::copy(c.begin(), c.end(), out);
  });
}

pmark_status pmark_key_seed_bit(const pmark_key* key, size_t t, size_t channel, int* out) {
  return guarded([&] {
    require(key != nullptr && out != nullptr, "key or out is null");
    *out = pmark::ChannelSeeds::from_key(key->key).bit(t, channel);
  });
}

pmark_status pmark_engine_create(const pmark_key* key, const char* config_json, int mock,
                                 pmark_engine** out) {
  return guarded([&] {
    require(key != nullptr && out != nullptr, "key or out is null");
    pmark::EngineConfig cfg =
        pmark::engine_config_from_json(config_json != nullptr ? config_json : "");
    auto engine = std::make_unique<pmark::Engine>(key->key, key->bytes, std::move(cfg), mock != 0);
    *out = new pmark_engine{std::move(engine)};
  });
}

void pmark_engine_free(pmark_engine* engine) { delete engine; }

pmark_status pmark_engine_check_mode(const pmark_engine* engine, const char* mode) {
  return guarded([&] {
    require(engine != nullptr, "engine is null");
    engine->engine->check_mode(mode_arg(mode));
  });
}

pmark_status pmark_engine_get_detection(const pmark_engine* engine, double* alpha,
                                        double* delta, double* K) {
  return guarded([&] {
    require(engine != nullptr && alpha != nullptr && delta != nullptr && K != nullptr,
            "engine or output is null");
    const pmark::DetectionParams p = engine->engine->detection();
    *alpha = p.alpha;
    *delta = p.delta;
    *K = p.K;
  });
}

pmark_status pmark_engine_set_detection(pmark_engine* engine, double alpha, double delta,
                                        double K) {
  return guarded([&] {
    require(engine != nullptr, "engine is null");
    if (!(alpha > 0.0 && alpha < 1.0)) pmark::fail(pmark::Errc::kInvalidConfig, "alpha must lie in (0, 1)");
    if (!(delta >= 0.0)) pmark::fail(pmark::Errc::kInvalidConfig, "delta must be >= 0");
    if (!(K > 0.0)) pmark::fail(pmark::Errc::kInvalidConfig, "K must be > 0");
    engine->engine->set_detection(pmark::DetectionParams{delta, K, alpha});
  });
}

pmark_status pmark_engine_generate(const pmark_engine* engine, const char* mode,
                                   const char* prompt, char** record) {
  std::optional<pmark::Error> failure;
  const pmark_status st = guarded([&] {
    require(engine != nullptr && prompt != nullptr && record != nullptr,
            "engine, prompt or record is null");
    *record = nullptr;
    *record = copy_string(engine->engine->generate_record(mode_arg(mode), prompt, failure));
    if (failure) throw *failure;
  });
  return st;
}

pmark_status pmark_engine_detect(const pmark_engine* engine, const char* mode, const char* line,
                                 char** record, int* verdict) {
  return guarded([&] {
    require(engine != nullptr && line != nullptr && record != nullptr && verdict != nullptr,
            "engine, line, record or verdict is null");
    *record = nullptr;
    *verdict = -1;
    std::optional<bool> v;
    std::optional<pmark::Error> failure;
    *record = copy_string(engine->engine->detect_record(mode_arg(mode), line, v, failure));
    if (v) *verdict = *v ? 1 : 0;
    if (failure) throw *failure;
  });
}

pmark_status pmark_simulate(const char* config_json, char** metrics_json, char** trials_jsonl) {
  return guarded([&] {
    require(config_json != nullptr && metrics_json != nullptr, "config or output is null");
    std::string trials;
    const std::string metrics = pmark::simulation_record(config_json, trials);
    *metrics_json = copy_string(metrics);
    if (trials_jsonl != nullptr) *trials_jsonl = copy_string(trials);
  });
}

pmark_status pmark_verify(const char* suite, int inject_nonuniform, char** report_json,
                          int* passed) {
  return guarded([&] {
    require(suite != nullptr && report_json != nullptr && passed != nullptr,
            "suite, report or passed is null");
    pmark::VerifyOptions opt;
    opt.suite = suite;
    opt.inject_nonuniform = inject_nonuniform != 0;
    const pmark::VerificationReport report = pmark::run_verification(opt);
    *passed = report.all_passed() ? 1 : 0;
    *report_json = copy_string(pmark::verification_to_json(report));
  });
}

pmark_status pmark_z_statistic(double n_green, size_t n_total, double* out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    *out = pmark::z_statistic(n_green, n_total);
  });
}

pmark_status pmark_z_threshold(double alpha, double* out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    *out = pmark::z_threshold(alpha);
  });
}

pmark_status pmark_hd_median(const double* values, size_t n, double* out) {
  return guarded([&] {
    require(out != nullptr && (values != nullptr || n == 0), "values or out is null");
    *out = pmark::hd_median(std::span<const double>(values, n));
  });
}

}  // extern "C"
