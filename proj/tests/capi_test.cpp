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

#include "veil.h"

#include <unistd.h>

#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>

#include <gtest/gtest.h>
#include <json.hpp>

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

struct Owned {
  char* s = nullptr;
  ~Owned() { veil_string_free(s); }
  json parsed() const { return json::parse(s); }
};

fs::path source_dir() { return fs::path(VEIL_SOURCE_DIR); }

TEST(CApi, VersionAndStatusStrings) {
  EXPECT_STREQ(veil_version(), "0.1.0");
  EXPECT_STREQ(veil_status_string(VEIL_OK), "ok");
  for (int s = VEIL_OK; s <= VEIL_ERR_INTERNAL; ++s)
    EXPECT_GT(std::strlen(veil_status_string(static_cast<veil_status>(s))), 0u);
  EXPECT_STREQ(veil_status_string(static_cast<veil_status>(99)), "unknown status");
  veil_string_free(nullptr);
}

TEST(CApi, NormalizeRoundTrip) {
  Owned out;
  ASSERT_EQ(veil_normalize("Diabetes, DIET plan!", &out.s), VEIL_OK);
  EXPECT_EQ(out.parsed(), json({"diabetes", "diet", "plan"}));
}

TEST(CApi, NullOutputIsRejected) {
  EXPECT_EQ(veil_normalize("x", nullptr), VEIL_ERR_INVALID_ARGUMENT);
  EXPECT_GT(std::strlen(veil_last_error()), 0u);
}

TEST(CApi, MalformedJsonIsAParseError) {
  Owned out;
  EXPECT_EQ(veil_simulate("{not json", &out.s), VEIL_ERR_PARSE);
  EXPECT_EQ(out.s, nullptr);
  EXPECT_GT(std::strlen(veil_last_error()), 0u);
  Owned ok;
  ASSERT_EQ(veil_normalize("a", &ok.s), VEIL_OK);
  EXPECT_STREQ(veil_last_error(), "");
}

TEST(CApi, SimulateReportsAccuracy) {
  Owned out;
  ASSERT_EQ(veil_simulate(R"({"node_count": 5, "max_queries": 100,
                              "corpus_documents": 300, "seed": 4})",
                          &out.s),
            VEIL_OK)
      << veil_last_error();
  auto r = out.parsed();
  EXPECT_EQ(r.at("queries").at("completed"), 100);
  EXPECT_EQ(r.at("accuracy").at("min_correctness"), 1.0);
  EXPECT_EQ(r.at("conservation").at("holds"), true);
}

TEST(CApi, SimulateRejectsBadConfig) {
  Owned out;
  EXPECT_EQ(veil_simulate(R"({"node_count": 0})", &out.s), VEIL_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(veil_simulate(R"({"nope": 1})", &out.s), VEIL_ERR_PARSE);
}

TEST(CApi, BenchCurve) {
  Owned out;
  ASSERT_EQ(veil_bench(R"({"rates": [1000, 2000], "requests_per_rate": 2000,
                           "trace_size": 200, "wall_clock_requests": 0})",
                       &out.s),
            VEIL_OK)
      << veil_last_error();
  auto r = out.parsed();
  ASSERT_TRUE(r.contains("points"));
  EXPECT_EQ(r.at("points").size(), 2u);
}

TEST(CApi, EvaluateAndCategorize) {
  auto path = fs::temp_directory_path() / ("veil_capi_" + std::to_string(getpid()) + ".csv");
  {
    Owned csv;
    ASSERT_EQ(veil_generate_log(R"({"users": 6, "queries_per_user": 30, "seed": 3})", &csv.s),
              VEIL_OK)
        << veil_last_error();
    std::ofstream(path) << csv.s;
  }
  json req = {{"log_path", path.string()}, {"log_format", "simple_csv"},
              {"mechanism", "adaptive"}};
  Owned eval;
  ASSERT_EQ(veil_evaluate(req.dump().c_str(), &eval.s), VEIL_OK) << veil_last_error();
  auto e = eval.parsed();
  EXPECT_EQ(e.at("mechanism"), "adaptive");
  EXPECT_EQ(e.at("users"), 6);
  EXPECT_GE(e.at("reidentification_rate").get<double>(), 0.0);
  EXPECT_LE(e.at("reidentification_rate").get<double>(), 1.0);

  Owned cat;
  ASSERT_EQ(veil_categorize(req.dump().c_str(), &cat.s), VEIL_OK) << veil_last_error();
  EXPECT_EQ(cat.parsed().at("queries"), 180);

  Owned missing;
  EXPECT_EQ(veil_categorize(R"({"log_path": "/no/such/file.csv"})", &missing.s), VEIL_ERR_IO);
  EXPECT_EQ(veil_categorize("{}", &missing.s), VEIL_ERR_INVALID_ARGUMENT);
  fs::remove(path);
}

TEST(CApi, NodeLifecycle) {
  veil_node* bad = nullptr;
  EXPECT_EQ(veil_node_create("{\"listen_addr\": 5", nullptr, &bad), VEIL_ERR_PARSE);
  EXPECT_EQ(bad, nullptr);
  EXPECT_EQ(veil_node_create(nullptr, nullptr, &bad), VEIL_ERR_INVALID_ARGUMENT);

  const int port = 30000 + getpid() % 20000 + 50;
  const std::string addr = "127.0.0.1:" + std::to_string(port);
  auto dir = fs::temp_directory_path() / ("veil_capi_node_" + std::to_string(getpid()));
  fs::create_directories(dir);
  std::ofstream(dir / "registry.txt") << addr << "\n";
  auto data = source_dir() / "data";
  json cfg = {{"listen_addr", addr},
              {"api_addr", "127.0.0.1:0"},
              {"registry_path", "registry.txt"},
              {"fixed_relay", addr},
              {"dict_dir", (data / "dicts").string()},
              {"seed_path", (data / "seed_queries.txt").string()},
              {"corpus_path", (data / "corpus.jsonl").string()},
              {"backend", "mock"}};

  veil_node* node = nullptr;
  ASSERT_EQ(veil_node_create(cfg.dump().c_str(), dir.c_str(), &node), VEIL_OK)
      << veil_last_error();
  int api_port = -1;
  ASSERT_EQ(veil_node_start(node, &api_port), VEIL_OK) << veil_last_error();
  EXPECT_GT(api_port, 0);

  veil_status st = VEIL_ERR_NOT_BOOTSTRAPPED;
  Owned resp;
  auto until = std::chrono::steady_clock::now() + std::chrono::seconds(10);
  while (std::chrono::steady_clock::now() < until) {
    veil_string_free(resp.s);
    resp.s = nullptr;
    st = veil_node_search(node, "diabetes diet", &resp.s);
    if (st == VEIL_OK) break;
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  ASSERT_EQ(st, VEIL_OK) << veil_last_error();
  auto r = resp.parsed();
  EXPECT_TRUE(r.contains("results"));

  Owned status;
  ASSERT_EQ(veil_node_status(node, &status.s), VEIL_OK);
  EXPECT_TRUE(status.parsed().is_object());

  int http = 0;
  Owned body;
  ASSERT_EQ(veil_node_request(node, "GET", "/no-such-route", nullptr, &http, &body.s), VEIL_OK);
  EXPECT_EQ(http, 404);
  Owned bad_body;
  ASSERT_EQ(veil_node_request(node, "POST", "/search", "{\"query\": 3}", &http, &bad_body.s),
            VEIL_OK);
  EXPECT_EQ(http, 400);

  EXPECT_EQ(veil_node_stop(node), VEIL_OK);
  veil_node_destroy(node);
  veil_node_destroy(nullptr);
  fs::remove_all(dir);
}

}  // namespace
