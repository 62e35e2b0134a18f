// Copyright 2026 The gaussian-pgm Authors
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

// gpgm: Gaussian pretty good measurements and instruments from the command line.

#include <chrono>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using gpgm::io::json;

struct Run {
  std::string spec_path;
  std::string out_path;
  std::vector<std::string> tol_overrides;
};

json error_json(const std::string& type, const std::string& message) {
  return {{"type", type}, {"message", message}};
}

int emit(const json& report, const std::string& out_path) {
  const std::string text = report.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
    return 0;
  }
  std::ofstream f(out_path);
  if (!f) {
    std::cerr << "gpgm: cannot write " << out_path << "\n";
    return 2;
  }
  f << text;
  return 0;
}

template <typename Fn>
int run_command(const std::string& name, const Run& run, gpgm::cli::Options opts, const json& flags, Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  json report = {{"version", 1}, {"command", name}, {"flags", flags}};
  int code = gpgm::cli::kOk;
  try {
    for (const auto& kv : run.tol_overrides) opts.tol.apply_override(kv);
    report["tolerances"] = opts.tol.to_json();
    std::ifstream in(run.spec_path);
    if (!in) throw gpgm::io::InputError("cannot read spec file " + run.spec_path);
    const json raw = json::parse(in);
    report["spec"] = raw;
    report["input_digest"] = gpgm::io::digest(raw);
    const gpgm::io::EnsembleSpec spec = gpgm::io::parse_spec(raw);
    gpgm::cli::Outcome out = fn(spec, opts);
    for (auto& [k, v] : out.report.items()) report[k] = v;
    code = out.exit_code;
  } catch (const json::exception& e) {
    report["error"] = error_json("input", std::string("malformed JSON: ") + e.what());
    code = gpgm::cli::kInputError;
  } catch (const gpgm::CutoffError& e) {
    report["error"] = error_json("cutoff", e.what());
    report["error"]["suggested_cutoff"] = e.suggested_cutoff();
    code = gpgm::cli::kInputError;
  } catch (const gpgm::NotFaithfulError& e) {
    report["error"] = error_json("not_faithful", e.what());
    report["error"]["margin"] = e.margin();
    code = gpgm::cli::kInputError;
  } catch (const gpgm::PreconditionError& e) {
    report["error"] = error_json("precondition", e.what());
    report["error"]["margin"] = e.margin();
    code = gpgm::cli::kInputError;
  } catch (const gpgm::DimensionError& e) {
    report["error"] = error_json("dimension", e.what());
    code = gpgm::cli::kInputError;
  } catch (const gpgm::io::InputError& e) {
    report["error"] = error_json("input", e.what());
    code = gpgm::cli::kInputError;
  } catch (const gpgm::Error& e) {
    report["error"] = error_json("consistency", e.what());
    code = gpgm::cli::kVerifyFailed;
  }
  if (report.contains("error")) std::cerr << "gpgm " << name << ": " << report["error"]["message"].get<std::string>() << "\n";
  report["timing"] = {{"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
  if (emit(report, run.out_path) != 0) return gpgm::cli::kInputError;
  return code;
}

void common(CLI::App* sub, Run& run) {
  sub->add_option("spec", run.spec_path, "ensemble spec (JSON)")->required();
  sub->add_option("--out", run.out_path, "write the report here instead of stdout");
  sub->add_option("--tol-override", run.tol_overrides, "override a tolerance, key=value (repeatable)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian pretty good measurement toolkit"};
  app.require_subcommand(1);
  Run run;
  gpgm::cli::Options o;

  auto* describe = app.add_subcommand("describe-pgm", "explicit Gaussian form of the PGM");
  common(describe, run);

  auto* mse = app.add_subcommand("mse", "closed-form mean square error, optional Monte Carlo");
  common(mse, run);
  mse->add_option("--trials", o.trials, "Monte Carlo trials (0: closed form only)")->check(CLI::NonNegativeNumber);
  mse->add_option("--seed", o.seed, "random seed");
  mse->add_option("--workers", o.workers, "Monte Carlo worker threads")->check(CLI::PositiveNumber);

  auto* inst = app.add_subcommand("instrument", "pretty good instrument for the spec's tau");
  common(inst, run);
  inst->add_option("--x", o.x, "parameter value, comma separated")->delimiter(',');

  auto* verify = app.add_subcommand("verify", "identity checks and Fock-space oracle comparisons");
  common(verify, run);
  verify->add_option("--cutoff", o.cutoff, "Fock cutoff per mode")->check(CLI::PositiveNumber);
  verify->add_option("--level", o.level, "fast or full")->check(CLI::IsMember({"fast", "full"}));

  auto* sample = app.add_subcommand("sample", "draw parameters and measurement outcomes");
  common(sample, run);
  sample->add_option("--count", o.count, "number of draws")->check(CLI::PositiveNumber);
  sample->add_option("--seed", o.seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : gpgm::cli::kInputError;
  }

  json flags = {{"tol_override", run.tol_overrides}};
  if (mse->parsed()) {
    flags.update({{"trials", o.trials}, {"seed", o.seed}, {"workers", o.workers}});
    return run_command("mse", run, o, flags, gpgm::cli::mse);
  }
  if (inst->parsed()) {
    flags["x"] = o.x;
    return run_command("instrument", run, o, flags, gpgm::cli::instrument);
  }
  if (verify->parsed()) {
    flags.update({{"cutoff", o.cutoff}, {"level", o.level}});
    return run_command("verify", run, o, flags, gpgm::cli::verify);
  }
  if (sample->parsed()) {
    flags.update({{"count", o.count}, {"seed", o.seed}});
    return run_command("sample", run, o, flags, gpgm::cli::sample);
  }
  return run_command("describe-pgm", run, o, flags, gpgm::cli::describe_pgm);
}
