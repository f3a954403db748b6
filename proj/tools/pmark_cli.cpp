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

// pmark command-line front end. Talks to the engine only through pmark.h.

#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "pmark.h"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kPartial = 2, kVerifyFailed = 3 };

struct Failure {
  int exit_code;
  std::string message;
};

[[noreturn]] void die(const std::string& what, pmark_status st) {
  throw Failure{kUsage, what + ": " + pmark_status_name(st) + ": " + pmark_last_error()};
}

void check(pmark_status st, const std::string& what) {
  if (st != PMARK_OK) die(what, st);
}

struct CString {
  char* p = nullptr;
  ~CString() { pmark_string_free(p); }
  std::string str() const { return p != nullptr ? p : ""; }
};

struct KeyHandle {
  pmark_key* p = nullptr;
  ~KeyHandle() { pmark_key_free(p); }
};

struct EngineHandle {
  pmark_engine* p = nullptr;
  ~EngineHandle() { pmark_engine_free(p); }
};

std::string read_text(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{kUsage, "cannot open " + path};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> read_lines(const std::string& path) {
  std::istringstream in(read_text(path));
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    lines.push_back(line);
  }
  return lines;
}

// Output sink; "-" is standard output.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path != "-") {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw Failure{kUsage, "cannot write " + path};
    }
    out_ = path == "-" ? &std::cout : &file_;
  }
  void write(const std::string& s) {
    std::lock_guard lock(mu_);
    *out_ << s;
  }
  void close() {
    out_->flush();
    if (!*out_) throw Failure{kUsage, "write failed"};
  }

 private:
  std::ofstream file_;
  std::ostream* out_;
  std::mutex mu_;
};

// Runs work(i) for every item on `jobs` threads. Results reach the sink in
// input order when `ordered`, otherwise as they finish.
void run_jobs(std::size_t n, unsigned jobs, bool ordered, Sink& sink,
              const std::function<std::string(std::size_t)>& work) {
  std::mutex mu;
  std::map<std::size_t, std::string> pending;
  std::size_t next_out = 0;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      std::string line = work(i) + "\n";
      if (!ordered) {
        sink.write(line);
        continue;
      }
      std::lock_guard lock(mu);
      pending.emplace(i, std::move(line));
      while (!pending.empty() && pending.begin()->first == next_out) {
        sink.write(pending.begin()->second);
        pending.erase(pending.begin());
        ++next_out;
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

std::string optional_config(const std::string& path) {
  return path.empty() ? std::string() : read_text(path);
}

struct KeygenArgs {
  std::string out;
  std::size_t dim = 768;
  std::size_t channels = 4;
  std::optional<std::uint64_t> seed;
};

int cmd_keygen(const KeygenArgs& a) {
  if (a.channels < 1 || a.dim < a.channels) {
    throw Failure{kUsage, "need dim >= channels >= 1"};
  }
  KeyHandle key;
  if (a.seed) {
    check(pmark_key_create(*a.seed, a.dim, a.channels, &key.p), "keygen");
  } else {
    check(pmark_key_create_random(a.dim, a.channels, &key.p), "keygen");
  }
  check(pmark_key_save(key.p, a.out.c_str()), "keygen");
  char fp[17];
  check(pmark_key_fingerprint(key.p, fp), "keygen");
  std::cerr << "wrote " << a.out << " (fingerprint " << fp << ")\n";
  return kOk;
}

struct RunArgs {
  std::string key;
  std::string mode = "online";
  std::string in;
  std::string out = "-";
  std::string config;
  bool mock = false;
  unsigned jobs = 1;
  bool ordered = false;
  std::optional<double> alpha, delta, K;
};

void open_engine(const RunArgs& a, KeyHandle& key, EngineHandle& engine) {
  check(pmark_key_load(a.key.c_str(), &key.p), "loading key");
  const std::string cfg = optional_config(a.config);
  check(pmark_engine_create(key.p, cfg.empty() ? nullptr : cfg.c_str(), a.mock ? 1 : 0,
                            &engine.p),
        "configuring engine");
  check(pmark_engine_check_mode(engine.p, a.mode.c_str()), "mode " + a.mode);
}

int cmd_generate(const RunArgs& a) {
  KeyHandle key;
  EngineHandle engine;
  open_engine(a, key, engine);
  const auto prompts = read_lines(a.in);
  Sink sink(a.out);
  std::atomic<std::size_t> failed{0};
  run_jobs(prompts.size(), a.jobs, a.ordered, sink, [&](std::size_t i) {
    CString rec;
    if (pmark_engine_generate(engine.p, a.mode.c_str(), prompts[i].c_str(), &rec.p) != PMARK_OK) {
      ++failed;
      if (rec.p == nullptr) return std::string("{\"kind\":\"generation\",\"error\":{}}");
    }
    return rec.str();
  });
  sink.close();
  std::cerr << "generated " << prompts.size() - failed << "/" << prompts.size()
            << " documents\n";
  return failed == 0 ? kOk : kPartial;
}

int cmd_detect(const RunArgs& a) {
  KeyHandle key;
  EngineHandle engine;
  open_engine(a, key, engine);
  double alpha = 0, delta = 0, K = 0;
  check(pmark_engine_get_detection(engine.p, &alpha, &delta, &K), "detection settings");
  check(pmark_engine_set_detection(engine.p, a.alpha.value_or(alpha), a.delta.value_or(delta),
                                   a.K.value_or(K)),
        "detection settings");
  const auto lines = read_lines(a.in);
  Sink sink(a.out);
  std::atomic<std::size_t> positive{0}, errors{0};
  run_jobs(lines.size(), a.jobs, a.ordered, sink, [&](std::size_t i) {
    CString rec;
    int verdict = -1;
    if (pmark_engine_detect(engine.p, a.mode.c_str(), lines[i].c_str(), &rec.p, &verdict) !=
        PMARK_OK) {
      ++errors;
    }
    if (verdict == 1) ++positive;
    return rec.str();
  });
  sink.close();
  std::cerr << "watermarked " << positive << "/" << lines.size() << " documents, "
            << errors << " errors\n";
  return errors == 0 ? kOk : kPartial;
}

struct SimulateArgs {
  std::string config;
  std::string out = "-";
  std::string trials_out;
};

int cmd_simulate(const SimulateArgs& a) {
  const std::string cfg = read_text(a.config);
  CString metrics, trials;
  check(pmark_simulate(cfg.c_str(), &metrics.p, &trials.p), "simulate");
  Sink sink(a.out);
  sink.write(metrics.str());
  sink.close();
  std::string trials_path = a.trials_out;
  if (trials_path.empty() && a.out != "-") trials_path = a.out + ".trials.jsonl";
  if (!trials_path.empty()) {
    Sink t(trials_path);
    t.write(trials.str());
    t.close();
  }
  return kOk;
}

struct VerifyArgs {
  std::string suite = "theory";
  std::string out = "-";
  bool inject = false;
};

int cmd_verify(const VerifyArgs& a) {
  CString report;
  int passed = 0;
  check(pmark_verify(a.suite.c_str(), a.inject ? 1 : 0, &report.p, &passed), "verify");
  Sink sink(a.out);
  sink.write(report.str());
  sink.close();
  return passed != 0 ? kOk : kVerifyFailed;
}

void add_run_flags(CLI::App* cmd, RunArgs& a, bool detect) {
  cmd->add_option("--key", a.key, "key file")->required();
  cmd->add_option("--mode", a.mode, "online or offline")
      ->check(CLI::IsMember({"online", "offline"}))
      ->capture_default_str();
  cmd->add_option(detect ? "--in" : "--prompt-file", a.in,
                  detect ? "JSONL input, one document per line" : "one prompt per line")
      ->required();
  cmd->add_option("--out", a.out, "JSONL output, - for stdout")->capture_default_str();
  cmd->add_option("--config", a.config, "JSON config file");
  cmd->add_flag("--mock", a.mock, "use the built-in deterministic endpoint");
  cmd->add_option("--jobs", a.jobs, "documents processed in parallel")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_flag("--ordered", a.ordered, "keep output in input order");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pmark: semantic multi-channel text watermarking"};
  app.require_subcommand(1);

  KeygenArgs keygen;
  auto* kg = app.add_subcommand("keygen", "create a key file");
  kg->add_option("--out", keygen.out, "key file to write")->required();
  kg->add_option("--dim", keygen.dim, "embedding dimension")->capture_default_str();
  kg->add_option("--channels", keygen.channels, "number of pivot channels")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  kg->add_option("--seed", keygen.seed, "fixed seed (default: OS entropy)");

  RunArgs gen;
  auto* gn = app.add_subcommand("generate", "generate watermarked documents");
  add_run_flags(gn, gen, false);

  RunArgs det;
  auto* dt = app.add_subcommand("detect", "detect watermarks in documents");
  add_run_flags(dt, det, true);
  dt->add_option("--alpha", det.alpha, "significance level (default 0.01)");
  dt->add_option("--delta", det.delta, "median margin (default 0.001)");
  dt->add_option("--K", det.K, "soft-count decay (default 150)");

  SimulateArgs sim;
  auto* sm = app.add_subcommand("simulate", "run a synthetic experiment");
  sm->add_option("--config", sim.config, "experiment config JSON")->required();
  sm->add_option("--out", sim.out, "metrics JSON, - for stdout")->capture_default_str();
  sm->add_option("--trials-out", sim.trials_out,
                 "per-trial JSONL (default: <out>.trials.jsonl)");

  VerifyArgs ver;
  auto* vf = app.add_subcommand("verify", "run the theory checks");
  vf->add_option("--suite", ver.suite, "theory or all")
      ->check(CLI::IsMember({"theory", "all"}))
      ->capture_default_str();
  vf->add_option("--out", ver.out, "report JSON, - for stdout")->capture_default_str();
  vf->add_flag("--inject-nonuniform", ver.inject,
               "negative control: the uniform-mass check must fail");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (kg->parsed()) return cmd_keygen(keygen);
    if (gn->parsed()) return cmd_generate(gen);
    if (dt->parsed()) return cmd_detect(det);
    if (sm->parsed()) return cmd_simulate(sim);
    if (vf->parsed()) return cmd_verify(ver);
  } catch (const Failure& f) {
    std::cerr << "pmark: " << f.message << "\n";
    return f.exit_code;
  }
  return kUsage;
}
