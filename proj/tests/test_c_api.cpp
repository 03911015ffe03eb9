/*******************************************************************************
* Copyright 2026 The straightleg Authors
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
*******************************************************************************/

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "straightleg/straightleg.h"

namespace
{

const char* kStanding = "plan:\n  step_count: 0\nsim:\n  settle_time: 0.2\n";

std::string slurp(const std::filesystem::path& p)
{
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(CApi, Version)
{
  EXPECT_STREQ(sl_version(), "1.0.0");
}

TEST(CApi, NullArguments)
{
  sl_scenario* s = nullptr;
  EXPECT_EQ(sl_scenario_parse(nullptr, &s), SL_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(sl_scenario_parse(kStanding, nullptr), SL_ERR_INVALID_ARGUMENT);
  EXPECT_STRNE(sl_last_error(), "");
  sl_result* r = nullptr;
  EXPECT_EQ(sl_run(nullptr, &r), SL_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(sl_scenario_set_mode(nullptr, SL_MODE_BENT), SL_ERR_INVALID_ARGUMENT);
  sl_metrics m;
  EXPECT_EQ(sl_result_metrics(nullptr, &m), SL_ERR_INVALID_ARGUMENT);
  sl_scenario_destroy(nullptr);
  sl_result_destroy(nullptr);
  sl_comparison_destroy(nullptr);
}

TEST(CApi, ConfigErrors)
{
  sl_scenario* s = nullptr;
  EXPECT_EQ(sl_scenario_parse("plan:\n  bogus: 1\n", &s), SL_ERR_CONFIG);
  EXPECT_EQ(s, nullptr);
  EXPECT_NE(std::string(sl_last_error()).find("plan.bogus"), std::string::npos);
  EXPECT_EQ(sl_scenario_load("/nonexistent/scenario.yaml", &s), SL_ERR_CONFIG);

  ASSERT_EQ(sl_scenario_parse(kStanding, &s), SL_OK);
  EXPECT_STREQ(sl_last_error(), "");
  EXPECT_EQ(sl_scenario_set_mode(s, static_cast<sl_mode>(7)), SL_ERR_INVALID_ARGUMENT);
  sl_scenario_destroy(s);
}

TEST(CApi, RunAndWrite)
{
  sl_scenario* s = nullptr;
  ASSERT_EQ(sl_scenario_parse(kStanding, &s), SL_OK);
  ASSERT_EQ(sl_scenario_set_seed(s, 99), SL_OK);
  sl_result* r = nullptr;
  ASSERT_EQ(sl_run(s, &r), SL_OK);
  sl_scenario_destroy(s);

  EXPECT_EQ(sl_result_outcome(r), SL_OUTCOME_OK);
  EXPECT_STREQ(sl_result_message(r), "");
  sl_metrics m{};
  ASSERT_EQ(sl_result_metrics(r, &m), SL_OK);
  EXPECT_EQ(m.rows, 101);
  EXPECT_EQ(m.fell, 0);
  EXPECT_EQ(m.swings, 0);

  const std::filesystem::path dir = std::filesystem::temp_directory_path() / "straightleg_capi";
  std::filesystem::create_directories(dir);
  ASSERT_EQ(sl_result_write_metrics_json(r, (dir / "metrics.json").c_str()), SL_OK);
  const std::string json = slurp(dir / "metrics.json");
  EXPECT_NE(json.find("\"seed\": 99"), std::string::npos);
  EXPECT_NE(json.find("\"status\": \"ok\""), std::string::npos);
  ASSERT_EQ(sl_result_write_csv(r, (dir / "telemetry.csv").c_str()), SL_OK);
  ASSERT_EQ(sl_result_write_plots(r, dir.c_str()), SL_OK);
  EXPECT_TRUE(std::filesystem::exists(dir / "icp.svg"));

  EXPECT_EQ(sl_result_write_qp_dump(r, (dir / "qp.json").c_str()), SL_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(sl_result_write_csv(r, "/nonexistent/dir/t.csv"), SL_ERR_IO);
  EXPECT_EQ(sl_result_write_metrics_json(r, "/nonexistent/dir/m.json"), SL_ERR_IO);
  sl_result_destroy(r);
}

TEST(CApi, Compare)
{
  sl_scenario* s = nullptr;
  ASSERT_EQ(sl_scenario_parse(kStanding, &s), SL_OK);
  sl_comparison* c = nullptr;
  ASSERT_EQ(sl_compare(s, &c), SL_OK);
  sl_scenario_destroy(s);
  EXPECT_EQ(sl_comparison_outcome(c, SL_MODE_STRAIGHT), SL_OUTCOME_OK);
  EXPECT_EQ(sl_comparison_outcome(c, SL_MODE_BENT), SL_OUTCOME_OK);
  EXPECT_NE(std::string(sl_comparison_report(c)).find("bent"), std::string::npos);
  const std::filesystem::path p = std::filesystem::temp_directory_path() / "straightleg_capi_compare.json";
  ASSERT_EQ(sl_comparison_write_json(c, p.c_str()), SL_OK);
  EXPECT_NE(slurp(p).find("identical_footholds"), std::string::npos);
  sl_comparison_destroy(c);
}
