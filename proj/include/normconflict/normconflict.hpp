// Copyright 2026 The normconflict Authors.
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

// Everything except the HTTP binding (annotation_http.hpp).

#pragma once

#include "normconflict/annotation_service.hpp"
#include "normconflict/classifier.hpp"
#include "normconflict/corpus.hpp"
#include "normconflict/embedding.hpp"
#include "normconflict/error.hpp"
#include "normconflict/evaluation.hpp"
#include "normconflict/metrics.hpp"
#include "normconflict/norm_extractor.hpp"
#include "normconflict/random.hpp"
#include "normconflict/synthetic.hpp"
#include "normconflict/text.hpp"
