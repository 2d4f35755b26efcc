// Copyright 2026 The Leakaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LEAKAUDIT_LEAKAUDIT_H_
#define LEAKAUDIT_LEAKAUDIT_H_

#include "leakaudit/adapter_model.h"
#include "leakaudit/aho_corasick.h"
#include "leakaudit/corpus.h"
#include "leakaudit/extractor.h"
#include "leakaudit/language_model.h"
#include "leakaudit/metrics.h"
#include "leakaudit/ngram_model.h"
#include "leakaudit/perplexity.h"
#include "leakaudit/pipeline.h"
#include "leakaudit/report_io.h"
#include "leakaudit/stats.h"
#include "leakaudit/version.h"

#endif  // LEAKAUDIT_LEAKAUDIT_H_
