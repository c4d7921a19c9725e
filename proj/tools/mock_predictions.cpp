/* Copyright 2026 The conceptkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Writes deterministic candidate predictions for a QA file so the scoring and
// evaluation commands can run without a trained model.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "conceptkit/error.hpp"
#include "conceptkit/predictions.hpp"

using namespace conceptkit;

int main(int argc, char** argv) {
  CLI::App app{"Generate mock candidate predictions for QA examples"};
  std::string qa_path, out = "predictions.jsonl";
  std::uint64_t seed = 0;
  double accuracy = 0.7;
  std::size_t distractors = 4;
  app.add_option("--qa", qa_path)->required()->check(CLI::ExistingFile);
  app.add_option("--seed", seed)->capture_default_str();
  app.add_option("--accuracy", accuracy, "Fraction of examples whose gold answer ranks first")->capture_default_str();
  app.add_option("--distractors", distractors)->capture_default_str();
  app.add_option("--out", out)->capture_default_str();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    std::vector<QAExample> qas;
    for_each_jsonl(qa_path, [&](const json& j, std::size_t) { qas.push_back(qa_from_json(j)); });
    auto records = mock_candidate_predictions(qas, seed, accuracy, distractors);
    std::ofstream os(out, std::ios::binary | std::ios::trunc);
    if (!os) throw RuntimeFailure("cannot write '" + out + "'");
    os << dump_line(json{{kHeaderKey, {{"command", "mock_predictions"}, {"logprob_norm", "sum"}, {"seed", seed}}}})
       << '\n';
    for (const auto& r : records) os << dump_line(r) << '\n';
    std::cout << "mock_predictions: " << records.size() << " records -> " << out << '\n';
    return 0;
  } catch (const ValidationError& e) {
    std::cerr << "mock_predictions: error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "mock_predictions: error: " << e.what() << '\n';
    return 2;
  }
}
