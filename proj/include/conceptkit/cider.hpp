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

#pragma once

#include <map>
#include <string>
#include <vector>

namespace conceptkit {

struct CiderOptions {
  int max_n = 4;
  double sigma = 6.0;
};

struct CiderResult {
  double score = 0.0;                        // mean of per_example
  std::map<std::string, double> per_example;
};

// Lowercased words with punctuation removed.
std::vector<std::string> caption_tokens(const std::string& caption);

// CIDEr-D over a corpus. Document frequencies come from the reference sets of
// the predicted ids, IDF is log(#ids) - log(max(1, df)). Per n-gram order the
// candidate and each reference are TF-IDF vectors; their similarity is the
// clipped dot product sum(min(c, r) * r) over the norms, times
// exp(-(len_c - len_r)^2 / (2 sigma^2)) with lengths in words. Per-example
// score is 10 x the mean over orders and references. Throws ValidationError
// when a prediction has no references.
CiderResult cider_d(const std::map<std::string, std::string>& predictions,
                    const std::map<std::string, std::vector<std::string>>& references,
                    const CiderOptions& options = {});

}  // namespace conceptkit
