// Copyright 2026 The Veil Authors
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

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "veil.h"

using json = nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string parent_dir(const std::string& path) {
  auto slash = path.find_last_of('/');
  return slash == std::string::npos ? "." : path.substr(0, slash);
}

void write_output(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text << (text.ends_with('\n') ? "" : "\n");
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text << (text.ends_with('\n') ? "" : "\n");
}

// Calls a JSON operation and returns its output, or exits with its status.
std::string call(veil_status (*op)(const char*, char**), const json& request) {
  char* out = nullptr;
  auto status = op(request.dump().c_str(), &out);
  if (status != VEIL_OK) {
    std::cerr << "error: " << veil_status_string(status) << ": " << veil_last_error() << "\n";
    std::exit(static_cast<int>(status));
  }
  std::string text(out);
  veil_string_free(out);
  return text;
}

std::vector<double> parse_rates(const std::string& list) {
  std::vector<double> rates;
  std::stringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double r = std::stod(item, &used);
    if (used != item.size() || r <= 0) throw CLI::ValidationError("--rates", "bad rate " + item);
    rates.push_back(r);
  }
  if (rates.empty()) throw CLI::ValidationError("--rates", "no rates given");
  return rates;
}

void write_attack_csv(const json& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "mechanism,k_max,user,real_queries,reidentified\n";
  for (const auto& u : report.at("per_user"))
    out << report.at("mechanism").get<std::string>() << ',' << report.at("k_max") << ','
        << u.at("user").get<std::string>() << ',' << u.at("real_queries") << ','
        << u.at("reidentified") << '\n';
}

void write_k_cdf(const json& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "k,cdf\n";
  const auto& cdf = report.at("k_cdf");
  for (std::size_t k = 0; k < cdf.size(); ++k) out << k << ',' << cdf[k].get<double>() << '\n';
}

int run_node(const std::string& config_path) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  auto text = read_file(config_path);
  veil_node* node = nullptr;
  auto status = veil_node_create(text.c_str(), parent_dir(config_path).c_str(), &node);
  if (status == VEIL_OK) {
    int port = 0;
    status = veil_node_start(node, &port);
    if (status == VEIL_OK) {
      std::cerr << "node running, api on port " << port << "; Ctrl-C to stop\n";
      int sig = 0;
      sigwait(&signals, &sig);
      veil_node_stop(node);
    }
  }
  if (status != VEIL_OK)
    std::cerr << "error: " << veil_status_string(status) << ": " << veil_last_error() << "\n";
  veil_node_destroy(node);
  return static_cast<int>(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Private web search node, simulator and evaluation tools"};
  app.require_subcommand(1);
  app.set_version_flag("--version", veil_version());

  std::string sim_config, sim_out;
  bool sim_logs = false;
  auto* sim = app.add_subcommand("simulate", "Run an in-process multi-node simulation");
  sim->add_option("--config", sim_config, "Simulation config (JSON)")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", sim_out, "Report path (stdout if omitted)");
  sim->add_flag("--include-logs", sim_logs, "Include host-side node logs in the report");

  std::string rates = "1000,5000,10000", bench_out;
  std::size_t bench_requests = 20000, bench_trace = 5000, bench_wall = 5000;
  auto* bench = app.add_subcommand("bench", "Latency versus offered rate on the relay path");
  bench->add_option("--rates", rates, "Comma-separated offered rates (req/s)");
  bench->add_option("--requests", bench_requests, "Requests per rate");
  bench->add_option("--trace", bench_trace, "Measured service-time samples");
  bench->add_option("--wall-clock", bench_wall, "Paced real requests per rate (0 skips)");
  bench->add_option("--out", bench_out, "Report path");

  std::string eval_log, eval_format, eval_mech = "adaptive", eval_dicts, eval_out, eval_csv, eval_cdf;
  int eval_kmax = 7;
  double eval_alpha = 0.5;
  std::uint64_t eval_seed = 1;
  bool eval_online = false;
  std::size_t syn_users = 50, syn_queries = 60;
  double syn_overlap = 0.5, syn_sensitive = 0.15;
  auto* eval = app.add_subcommand("evaluate", "Re-identification attack against a query log");
  eval->add_option("--log", eval_log, "Query log; a synthetic log is generated when omitted");
  eval->add_option("--format", eval_format, "aol_tsv or simple_csv (guessed from the extension)");
  eval->add_option("--mechanism", eval_mech, "none, adaptive or fixed_k");
  eval->add_option("--k-max", eval_kmax, "Maximum number of fake queries");
  eval->add_option("--alpha", eval_alpha, "Smoothing factor");
  eval->add_option("--dict-dir", eval_dicts, "Sensitive-topic dictionaries");
  eval->add_option("--seed", eval_seed, "Random seed");
  eval->add_flag("--online-adversary", eval_online, "Adversary grows profiles during the attack");
  eval->add_option("--users", syn_users, "Synthetic log: users");
  eval->add_option("--queries-per-user", syn_queries, "Synthetic log: queries per user");
  eval->add_option("--overlap", syn_overlap, "Synthetic log: vocabulary overlap");
  eval->add_option("--sensitive", syn_sensitive, "Synthetic log: sensitive fraction");
  eval->add_option("--out", eval_out, "Report path (JSON)");
  eval->add_option("--csv", eval_csv, "Per-user breakdown (CSV)");
  eval->add_option("--k-cdf", eval_cdf, "k distribution as CSV for plotting");

  std::string node_config;
  auto* node = app.add_subcommand("node", "Run a live node");
  node->add_option("--config", node_config, "Node config (JSON or key=value)")->required()->check(CLI::ExistingFile);

  std::string cat_dicts, cat_log, cat_format, cat_truth, cat_out;
  auto* cat = app.add_subcommand("categorize", "Detect sensitive queries in a log");
  cat->add_option("--dict-dir", cat_dicts, "Sensitive-topic dictionaries")->required()->check(CLI::ExistingDirectory);
  cat->add_option("--log", cat_log, "Query log")->required()->check(CLI::ExistingFile);
  cat->add_option("--format", cat_format, "aol_tsv or simple_csv");
  cat->add_option("--truth", cat_truth, "One 0/1 label per log row, for precision and recall");
  cat->add_option("--out", cat_out, "Report path");

  std::string syn_out, syn_dicts;
  std::uint64_t syn_seed = 1;
  std::size_t gen_users = 50, gen_queries = 60;
  double gen_overlap = 0.5, gen_sensitive = 0.15;
  auto* gen = app.add_subcommand("synth", "Write a synthetic simple_csv query log");
  gen->add_option("--out", syn_out, "Output path (stdout if omitted)");
  gen->add_option("--users", gen_users, "Users");
  gen->add_option("--queries-per-user", gen_queries, "Queries per user");
  gen->add_option("--overlap", gen_overlap, "Vocabulary overlap");
  gen->add_option("--sensitive", gen_sensitive, "Sensitive fraction");
  gen->add_option("--dict-dir", syn_dicts, "Dictionaries supplying sensitive terms");
  gen->add_option("--seed", syn_seed, "Random seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      auto req = json::parse(read_file(sim_config));
      req["base_dir"] = parent_dir(sim_config);
      req["include_logs"] = sim_logs;
      write_output(call(veil_simulate, req), sim_out);
    } else if (*bench) {
      json req{{"rates", parse_rates(rates)},
               {"requests_per_rate", bench_requests},
               {"trace_size", bench_trace},
               {"wall_clock_requests", bench_wall}};
      write_output(call(veil_bench, req), bench_out);
    } else if (*eval) {
      json req{{"mechanism", eval_mech}, {"k_max", eval_kmax}, {"alpha", eval_alpha},
               {"seed", eval_seed}, {"online_adversary", eval_online}};
      if (!eval_log.empty()) req["log_path"] = eval_log;
      if (!eval_format.empty()) req["log_format"] = eval_format;
      if (!eval_dicts.empty()) req["dict_dir"] = eval_dicts;
      req["synthetic"] = {{"users", syn_users}, {"queries_per_user", syn_queries},
                          {"vocabulary_overlap", syn_overlap},
                          {"sensitive_fraction", syn_sensitive}, {"seed", eval_seed}};
      auto text = call(veil_evaluate, req);
      auto report = json::parse(text);
      if (!eval_csv.empty()) write_attack_csv(report, eval_csv);
      if (!eval_cdf.empty()) write_k_cdf(report, eval_cdf);
      write_output(text, eval_out);
    } else if (*node) {
      return run_node(node_config);
    } else if (*cat) {
      json req{{"dict_dir", cat_dicts}, {"log_path", cat_log}};
      if (!cat_format.empty()) req["log_format"] = cat_format;
      if (!cat_truth.empty()) req["truth_path"] = cat_truth;
      write_output(call(veil_categorize, req), cat_out);
    } else if (*gen) {
      json req{{"users", gen_users}, {"queries_per_user", gen_queries},
               {"vocabulary_overlap", gen_overlap}, {"sensitive_fraction", gen_sensitive},
               {"seed", syn_seed}};
      if (!syn_dicts.empty()) req["dict_dir"] = syn_dicts;
      auto csv = call(veil_generate_log, req);
      if (syn_out.empty()) std::cout << csv;
      else write_output(csv, syn_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
